#!/usr/bin/env python3
"""
lvanish MCP Server

Exposes the vanishing decision, table, Zagier and Maass-check jobs as
Model Context Protocol tools over stdio, so MCP hosts can run them.
"""

import asyncio
import logging
from typing import Any, Dict, List

from mcp.server import Server
from mcp.server.models import InitializationOptions
from mcp.server.stdio import stdio_server

from . import __version__
from .cli import run_job
from .config import JobConfig, Mode, Settings, load_fixture
from .errors import LVanishError

logger = logging.getLogger(__name__)

SERVER_NAME = "lvanish-mcp-server"

_JOB_PROPERTIES = {
    "k": {"type": "integer", "description": "Weight parameter, at least 2"},
    "N": {"type": "integer", "description": "Level"},
    "D0": {"description": "Fundamental discriminant or list of candidates for auto-selection"},
    "D": {"type": "array", "items": {"type": "integer"}, "description": "Candidate discriminants"},
    "D_range": {"type": "object", "description": "Inclusive {start, stop} range of candidates"},
    "hecke": {"type": "array", "description": "List of {p, shift} Hecke factors"},
    "base_point": {"type": "string", "description": "Rational base point, default 0"},
    "points": {"type": "array", "items": {"type": "string"}, "description": "Rational evaluation points"},
    "generators": {"type": "array", "description": "Optional 2x2 generator matrices of Gamma0(N)"},
    "extended_cusp_check": {"type": "boolean"},
    "atkin_lehner": {"type": "object", "description": "User asserted Atkin-Lehner metadata"},
    "max_denominator": {"type": "integer", "description": "Cost rail; omit to use the environment default"},
    "force": {"type": "boolean", "description": "Ignore the cost rail"},
}


class LVanishMCPServer:
    def __init__(self, settings: Settings):
        self.settings = settings
        self.server = Server(SERVER_NAME, version=__version__)
        self.setup_tools()

    def setup_tools(self):
        """Register the job tools with the MCP server."""

        @self.server.list_tools()
        async def list_tools() -> List[Dict[str, Any]]:
            return self.tool_definitions()

        @self.server.call_tool()
        async def call_tool(name: str, arguments: Dict[str, Any]) -> Dict[str, Any]:
            return await self.dispatch(name, arguments)

    def tool_definitions(self) -> List[Dict[str, Any]]:
        return [
            {
                "name": "decide",
                "description": "Decide vanishing of the twisted L-value product for each candidate D",
                "inputSchema": {"type": "object", "properties": _JOB_PROPERTIES, "required": ["k", "N", "D0"]},
            },
            {
                "name": "table",
                "description": "Exact relative local polynomial values at fixed points",
                "inputSchema": {"type": "object", "properties": _JOB_PROPERTIES, "required": ["k", "N", "D0"]},
            },
            {
                "name": "zagier",
                "description": "Zagier sums p_{N,delta}(x) and the coefficients of p_{N,delta,0}",
                "inputSchema": {
                    "type": "object",
                    "properties": dict(_JOB_PROPERTIES, delta={"description": "Discriminant or list"}),
                    "required": ["k", "N"],
                },
            },
            {
                "name": "maass_check",
                "description": "Numeric modularity, Fricke, wall and Hecke residuals of the Maass form",
                "inputSchema": {
                    "type": "object",
                    "properties": dict(_JOB_PROPERTIES, maass={"type": "object"}),
                    "required": ["k", "N", "D0", "maass"],
                },
            },
            {
                "name": "list_fixtures",
                "description": "Tabulated L-values and Hecke eigenvalues shipped with the package",
                "inputSchema": {"type": "object", "properties": {}},
            },
        ]

    async def dispatch(self, name: str, arguments: Dict[str, Any]) -> Dict[str, Any]:
        """Execute tools based on the name and arguments."""
        try:
            if name == "decide":
                return await self._handle_job(Mode.DECIDE, arguments)
            elif name == "table":
                return await self._handle_job(Mode.TABLE, arguments)
            elif name == "zagier":
                return await self._handle_job(Mode.ZAGIER, arguments)
            elif name == "maass_check":
                return await self._handle_job(Mode.MAASS_CHECK, arguments)
            elif name == "list_fixtures":
                return await self._handle_list_fixtures()
            else:
                return {"error": f"Unknown tool: {name}"}
        except LVanishError as e:
            logger.error(f"Error executing tool {name}: {str(e)}")
            return {"error": str(e)}
        except Exception as e:
            logger.exception(f"Unexpected failure in tool {name}")
            return {"error": str(e)}

    async def _handle_job(self, mode: Mode, arguments: Dict[str, Any]) -> Dict[str, Any]:
        raw = dict(arguments)
        force = bool(raw.pop("force", False))
        max_denominator = raw.pop("max_denominator", None)
        raw["mode"] = mode.value
        config = JobConfig.from_dict(raw)
        if force:
            bound = None
        else:
            bound = max_denominator if max_denominator is not None else self.settings.max_denominator
        result = await asyncio.to_thread(run_job, config, self.settings, bound)
        return result.structured

    async def _handle_list_fixtures(self) -> Dict[str, Any]:
        try:
            return load_fixture("lvalues.json", self.settings.data_dir)
        except OSError as e:
            return {"error": f"Fixture unavailable: {e}"}


async def serve():
    """Run the MCP server on stdio."""
    settings = Settings.from_env()
    logging.basicConfig(level=getattr(logging, settings.log_level, logging.INFO))
    server = LVanishMCPServer(settings)
    logger.info(f"Starting {SERVER_NAME} {__version__}")

    async with stdio_server() as (read_stream, write_stream):
        await server.server.run(
            read_stream,
            write_stream,
            InitializationOptions(
                server_name=SERVER_NAME,
                server_version=__version__,
                capabilities={
                    "tools": {},
                },
            ),
        )


def main():
    asyncio.run(serve())


if __name__ == "__main__":
    main()
