"""divgauge: change-of-measure inequalities and generalization bounds on
finite probability spaces, verified exactly by exhaustive enumeration."""

from .dist import (
    AbsContPair,
    EventMask,
    FiniteDistribution,
    JointFinite,
    enumerate_events,
    event_probability,
    joint_from_matrix,
    make_distribution,
    make_pair,
    product_pair,
)
from .divergences import (
    CHI2,
    KL,
    REVERSE_CHI2,
    REVERSE_KL,
    SQUARED_HELLINGER,
    TV,
    VINCZE_LECAM,
    DivergenceKind,
    DivergenceValue,
    bernoulli_kl,
    binary_f_divergence,
    binary_renyi,
    f_divergence,
    fiber_constants,
    hellinger_to_renyi,
    hockey_stick_kind,
    maximal_leakage,
    mutual_information,
    power_kind,
    renyi,
    renyi_kind,
    renyi_to_hellinger,
    sibson_mi,
)
from .orlicz import (
    OrliczSpec,
    amemiya_norm,
    custom_orlicz,
    luxemburg_indicator_norm,
    luxemburg_norm_values,
    power_orlicz,
)
from .bounds import (
    BoundResult,
    ConjugateSpec,
    bound_chi2,
    bound_egamma,
    bound_f_via_egamma,
    bound_hellinger,
    bound_kl,
    bound_orlicz,
    bound_orlicz_joint,
    bound_power_beta,
    bound_reverse_chi2,
    bound_reverse_kl,
    bound_strong_converse,
    bound_vincze_lecam,
    bound_young_fenchel,
    competitor_bound,
    conjugate_spec_for,
    invert_binary_kl,
)
from .genbounds import (
    BoundedLossSetting,
    DPParams,
    GenTailResult,
    SubGaussianSetting,
    avg_gen_bound_mi,
    avg_mi_competitor,
    cmi_convert,
    cmi_tail_egamma,
    cmi_tail_orlicz,
    dp_egamma_cap,
    dp_gen_bound,
    gen_tail_alpha_mi,
    gen_tail_bounds,
    gen_tail_ml,
    gen_tail_ml_chi2,
    mi_gap_constant,
    pac_bayes_bound,
)
from .experiments import (
    GibbsExperiment,
    GibbsRun,
    SuperSampleExperiment,
    SuperSampleRun,
    run_gibbs_experiment,
    run_supersample_experiment,
)
from .verify import (
    VerificationReport,
    approx_max_info,
    binary_tightness_witness,
    dominance_report,
    harness_self_test,
    master_soundness,
    random_joint,
    random_pair,
    sibson_grid_min,
    verify_com_bound,
    verify_egamma_variational,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "AbsContPair", "EventMask", "FiniteDistribution", "JointFinite",
    "enumerate_events", "event_probability", "joint_from_matrix",
    "make_distribution", "make_pair", "product_pair",
    "CHI2", "KL", "REVERSE_CHI2", "REVERSE_KL", "SQUARED_HELLINGER", "TV",
    "VINCZE_LECAM", "DivergenceKind", "DivergenceValue", "bernoulli_kl",
    "binary_f_divergence", "binary_renyi", "f_divergence", "fiber_constants",
    "hellinger_to_renyi", "hockey_stick_kind", "maximal_leakage",
    "mutual_information", "power_kind", "renyi", "renyi_kind",
    "renyi_to_hellinger", "sibson_mi",
    "OrliczSpec", "amemiya_norm", "custom_orlicz", "luxemburg_indicator_norm",
    "luxemburg_norm_values", "power_orlicz",
    "BoundResult", "ConjugateSpec", "bound_chi2", "bound_egamma",
    "bound_f_via_egamma", "bound_hellinger", "bound_kl", "bound_orlicz",
    "bound_orlicz_joint", "bound_power_beta", "bound_reverse_chi2",
    "bound_reverse_kl", "bound_strong_converse", "bound_vincze_lecam",
    "bound_young_fenchel", "competitor_bound", "conjugate_spec_for",
    "invert_binary_kl",
    "BoundedLossSetting", "DPParams", "GenTailResult", "SubGaussianSetting",
    "avg_gen_bound_mi", "avg_mi_competitor", "cmi_convert", "cmi_tail_egamma",
    "cmi_tail_orlicz", "dp_egamma_cap", "dp_gen_bound", "gen_tail_alpha_mi",
    "gen_tail_bounds", "gen_tail_ml", "gen_tail_ml_chi2", "mi_gap_constant",
    "pac_bayes_bound",
    "GibbsExperiment", "GibbsRun", "SuperSampleExperiment", "SuperSampleRun",
    "run_gibbs_experiment", "run_supersample_experiment",
    "VerificationReport", "approx_max_info", "binary_tightness_witness",
    "dominance_report", "harness_self_test", "master_soundness",
    "random_joint", "random_pair", "sibson_grid_min", "verify_com_bound",
    "verify_egamma_variational",
    "errors",
]
