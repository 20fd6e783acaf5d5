"""wikisr: semantic rule filtering over the Wikipedia link graph."""

__version__ = "0.1.0"
