"""Superpixel-neighborhood matching and exemplar-based label transfer.

Images are (H, W, 3) uint8 arrays, label maps are (H, W) int32 arrays with
superpixel ids 0..K-1, and class maps are (H, W) int32 arrays of class
indices. Match records travel as (N, 6) float arrays with columns
(src, run, lib_image, lib_sp, scale, distance).
"""

from dspm._core import (
    PipelineError,
    add_noise,
    evaluate,
    gen_labeled_scene,
    gen_test_scene,
    gen_textures,
    majority_classes,
    match,
    render_displacement,
    slic,
    transfer_labels,
)

__all__ = [
    "PipelineError",
    "add_noise",
    "evaluate",
    "gen_labeled_scene",
    "gen_test_scene",
    "gen_textures",
    "majority_classes",
    "match",
    "render_displacement",
    "slic",
    "transfer_labels",
]
