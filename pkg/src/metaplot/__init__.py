"""metaplot: statistical reproducibility auditing for correlation
meta-analyses.

The library ingests study-level correlation records, runs them through the
Fisher z pipeline to per-study p-values, builds rank-ordered p-value plots
with uniformity diagnostics, computes Gaussian group tail-ratio tables,
and simulates omitted-confounder regression bias.
"""

from ._version import __version__
from .cohort import (
    CohortConfig,
    Confounder,
    GapReport,
    Pcg32,
    RankDeficiencyError,
    gap_decomposition,
    generate_cohort,
    ols_fit,
)
from .fisher import (
    AggregationMode,
    StudySummary,
    ZSummary,
    aggregate_study,
    r_to_pvalue,
    summarize_group,
    summarize_studies,
    summarize_z,
)
from .gaussian import (
    GaussianSpec,
    PRESETS,
    TailRow,
    TailTable,
    curve_points,
    ratio_table,
    tail_area,
)
from .ingest import (
    CorrelationClass,
    GroupingReport,
    ParseFailure,
    ParseResult,
    StudyGroup,
    StudyRecord,
    group_complete_studies,
    parse_records,
)
from .numerics import (
    Probability,
    arctanh,
    erf,
    erfc,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
    std_normal_sf,
)
from .pplot import (
    ClassifyThresholds,
    PlotClass,
    PlotDiagnostics,
    PValuePlot,
    build_plot,
    classify,
    ks_uniform,
)
from .report import (
    AuditMetadata,
    AuditReport,
    parse_json,
    render_json,
    render_markdown,
    render_svg_gaussians,
    render_svg_pplot,
    render_svg_zpanel,
)

__all__ = [
    "__version__",
    "AggregationMode",
    "AuditMetadata",
    "AuditReport",
    "ClassifyThresholds",
    "CohortConfig",
    "Confounder",
    "CorrelationClass",
    "GapReport",
    "GaussianSpec",
    "GroupingReport",
    "ParseFailure",
    "ParseResult",
    "Pcg32",
    "PlotClass",
    "PlotDiagnostics",
    "PRESETS",
    "Probability",
    "PValuePlot",
    "RankDeficiencyError",
    "StudyGroup",
    "StudyRecord",
    "StudySummary",
    "TailRow",
    "TailTable",
    "ZSummary",
    "aggregate_study",
    "arctanh",
    "build_plot",
    "classify",
    "curve_points",
    "erf",
    "erfc",
    "gap_decomposition",
    "generate_cohort",
    "group_complete_studies",
    "ks_uniform",
    "ols_fit",
    "parse_json",
    "parse_records",
    "r_to_pvalue",
    "ratio_table",
    "render_json",
    "render_markdown",
    "render_svg_gaussians",
    "render_svg_pplot",
    "render_svg_zpanel",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
    "std_normal_sf",
    "summarize_group",
    "summarize_studies",
    "summarize_z",
    "tail_area",
]
