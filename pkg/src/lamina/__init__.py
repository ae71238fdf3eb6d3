"""Random recursive laminations of the disk and their fragmentation structure."""

__version__ = "0.1.0"
