"""Multilayer-network graph signal processing for hyperspectral image
segmentation: order-4 tensor spectra over band-layered superpixel
graphs, with unsupervised, semi-supervised, and multiresolution-fusion
pipelines."""

__version__ = "0.1.0"

from .clustering import (
    ClusterAssignment,
    SpectralEmbedding,
    graph_spectral_clustering,
    kmeans,
    mln_spectral_clustering,
    regroup,
    select_p_largest_gap,
)
from .classify import (
    LinearModel,
    SrcResult,
    TrainTestSplit,
    load_model,
    make_split,
    mln_src,
    predict,
    save_model,
    train_ovr,
)
from .fusion import (
    FusionWeights,
    MrcResult,
    fuse_majority,
    graph_total_variation,
    mln_mrc,
    von_neumann_entropy,
    weight_dv,
    weight_mv,
    weight_tv,
    weight_va,
    weight_vn,
)
from .hsi_io import (
    export_labelmap_ppm,
    inject_noise,
    load_cube,
    load_labels,
    save_cube,
    save_labels,
)
from .metrics import boundary_accuracy, boundary_map, overall_accuracy
from .mln import (
    BandPartition,
    MlnAdjacency,
    MlnConfig,
    build_mln_adjacency,
    build_single_layer_graph,
    cluster_bands,
    entity_spectrum,
    expand_adjacency,
)
from .superpixel import (
    ErsConfig,
    PixelGraph,
    SuperpixelMap,
    build_pixel_graph,
    ers_segment,
    ers_segment_multi,
    superpixel_centroids,
    superpixel_features,
)
from .synthetic import make_benchmark
from .tensor import (
    HosvdResult,
    fold,
    hosvd,
    inverse_mgst,
    mgst,
    mode_singular_values,
    n_mode_product,
    unfold,
)
