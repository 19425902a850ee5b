"""Procedural multi-camera synthetic dataset generator for aerial object detection.

Generates desk-scale aerial scenes (drones with and without payloads, birds,
unannotated flock clutter) rendered by a deterministic software rasterizer,
corrupted by severity-parameterized weather, and annotated automatically from
instance segmentation maps into YOLO-format label files.
"""

__version__ = "0.1.0"
