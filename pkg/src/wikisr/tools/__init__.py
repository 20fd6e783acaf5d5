"""MCP tool implementations for wikisr."""
