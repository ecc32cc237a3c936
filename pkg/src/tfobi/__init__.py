"""Independent component analysis for tensor-valued data: FOBI, MFOBI and TFOBI."""

from .asymptotics import (
    AsvTable,
    MomentProfile,
    all_mode_asv,
    expected_limit_mdi,
    fobi_asv,
    mfobi_asv,
    tfobi_asv,
    variant_superiority,
)
from .errors import (
    IdentifiabilityError,
    IdentifiabilityWarning,
    NumericalError,
    ParseError,
    SingularCovarianceError,
    TfobiError,
)
from .estimators import (
    UnmixingModel,
    component_kurtosis,
    fobi_fit,
    mfobi_fit,
    recover_sources,
    select_extreme_components,
    tfobi_fit,
    tfobi_fit_variants,
)
from .metrics import MdiResult, comparable_transformed, kron_mdi, mdi
from .moments import m_mode_covariance, m_mode_fobi, moment_set
from .tensor import m_mode_product, multi_mode_product, unfold

__version__ = "0.1.0"
