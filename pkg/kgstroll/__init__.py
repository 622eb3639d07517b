# kgstroll/__init__.py
# Package metadata: version and tool name.

PACKAGE_NAME: str = "kgstroll"
VERSION: str = "0.4.0"

__all__ = ["PACKAGE_NAME", "VERSION"]
