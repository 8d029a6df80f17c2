"""
Feature extraction for avifind.

Image decoding and edges, DoG keypoints, shape-context and color-moment
descriptors, and batch description.
"""

from __future__ import annotations

from avifind.features.descriptors import (
    ColorMoments,
    DescriptorSet,
    EmptyReason,
    FusedDescriptor,
    LogPolarCoord,
    ShapeContext,
    color_moments,
    describe_image,
    fuse,
    keypoint_direction,
    log_polar_bin,
    log_polar_coord,
    mean_pairwise_distance,
    reweight_color,
    shape_context,
)
from avifind.features.imaging import (
    ContourSet,
    EdgeMap,
    RasterImage,
    detect_edges,
    load_image,
    resize_to_max_side,
    sample_contour,
    to_grayscale,
)
from avifind.features.keypoints import DogPyramid, Keypoint, build_dog_pyramid, detect_keypoints
from avifind.features.pipeline import describe_file, describe_sources

__all__ = [
    "ColorMoments",
    "ContourSet",
    "DescriptorSet",
    "DogPyramid",
    "EdgeMap",
    "EmptyReason",
    "FusedDescriptor",
    "Keypoint",
    "LogPolarCoord",
    "RasterImage",
    "ShapeContext",
    "build_dog_pyramid",
    "color_moments",
    "describe_file",
    "describe_image",
    "describe_sources",
    "detect_edges",
    "detect_keypoints",
    "fuse",
    "keypoint_direction",
    "load_image",
    "log_polar_bin",
    "log_polar_coord",
    "mean_pairwise_distance",
    "resize_to_max_side",
    "reweight_color",
    "sample_contour",
    "shape_context",
    "to_grayscale",
]
