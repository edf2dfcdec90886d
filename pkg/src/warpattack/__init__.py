"""Query-efficient black-box adversarial attacks on video classifiers.

Search directions for the two-query gradient estimator are parameterized
by per-frame geometric transforms of a single noise frame, shrinking the
search space from T*H*W*C to H*W*C + T*D.
"""
from .attack import (
    AttackConfig,
    AttackResult,
    AttackTrace,
    compute_anq_sr,
    eval_gradient_quality,
    min_frame_psnr,
    run_attack,
)
from .core import (
    NoiseFrame,
    SeededRng,
    VideoTensor,
    clip_perturbation,
    l2_normalize,
    linf_norm,
    sample_normal,
    sign,
)
from .estimator import EstimatorState, grad_est, oracle_loss_fn, update_g
from .losses import (
    LossKind,
    ProbVector,
    Targeted,
    Untargeted,
    cw_loss,
    flicker_loss,
    is_success,
    targeted_ce,
    untargeted_ce,
)
from .samplers import (
    FlowPriorSampler,
    GeoTrapSampler,
    MultiNoiseSampler,
    OneNoiseSampler,
    sampler_from_string,
)
from .victims import (
    CountingOracle,
    LinearSoftmaxVictim,
    MovingBlobVictim,
    QuadraticLossOracle,
    StructuredGradientVictim,
    VictimInfo,
    VictimOracle,
    fd_gradient,
    make_blob_video,
)
from .warp import TransformFamily, WarpParams, build_matrix, trans_warp, warp_frame

__version__ = "0.1.0"
