"""
avifind: content-based bird image retrieval.

Describes images by shape contexts around DoG keypoints fused with local
color moments, quantizes them against a k-means visual vocabulary and
ranks a corpus by bag-of-words histogram distance:
- features: edges, contour sampling, keypoints, fused descriptors
- retrieval: vocabulary training, index building, querying
- evaluation: precision/recall grid over vocabulary size and contour density
"""

__version__ = "0.1.0"
__all__ = ["__version__"]
