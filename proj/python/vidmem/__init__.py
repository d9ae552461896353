"""Geometric memory gating for long-horizon video rollouts."""

from vidmem._core import (  # noqa: F401
    CameraPose,
    ConsistencyReport,
    DriftConfig,
    EpisodeConfig,
    EpisodeRecord,
    Frame,
    GateDecision,
    GatingConfig,
    Intrinsics,
    OverlapConfig,
    PatternParams,
    PseudoLoop,
    RevisitPair,
    RevisitPairing,
    SceneSpec,
    Trajectory,
    TrainingPair,
    apply_history_dropout,
    compute_gates,
    evaluate,
    export_re10k,
    fov_overlap,
    gen_pattern,
    import_re10k,
    pair_revisits,
    plucker_embed,
    project_point,
    psnr,
    relevance_matrix,
    render,
    run_episode,
    save_episode,
    ssim,
    synth_pseudo_loop,
    translation_distance,
)

__all__ = [name for name in dir() if not name.startswith("_")]
