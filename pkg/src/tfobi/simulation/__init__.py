"""Source catalog, IC-model sampling, LDA and the simulation studies."""

from .distributions import CATALOG, SourceDistribution, get_distribution
from .lda import LdaModel, lda_fit, lda_predict
from .sampling import (
    REGIMES,
    TABLE3,
    VARIANT_SETTINGS,
    MixingSpec,
    SourceGrid,
    derive_seed,
    gen_mixing,
    haar_orthogonal,
    sample_ic,
    sample_sources,
)
from .studies import (
    ClassificationConfig,
    ExperimentResult,
    SeparationConfig,
    StudyRow,
    VariantConfig,
    make_config,
    run_classification_study,
    run_separation_study,
    run_variant_study,
)
