"""Node-private network statistics, network models fitted to them, and SIS epidemics on the samples."""

from .anova import VarianceDecomposition, nested_anova, variance_decomposition
from .epidemic import (
    BASELINE,
    HIGH,
    LOW,
    TEST_AND_TREAT,
    EpidemicSummary,
    EpidemicTrajectory,
    SimConfig,
    incidence_rate_ratio,
    prevalence_ratio,
    run_sis,
    summarize,
)
from .experiment import (
    DP,
    NO_DP,
    OBSERVED,
    ExperimentPlan,
    ObservedConfig,
    ResultRow,
    derive_seed,
    expected_row_count,
    export_plot_data,
    export_results,
    generate_observed_network,
    parse_results,
    run_experiment,
)
from .graph import (
    AttributedGraph,
    AttributeSchema,
    Stat,
    count_edges,
    count_nodes_with_min_degree,
    degree_histogram,
    from_edges,
    load_graph,
    mixing_matrix,
    nodefactor,
    nodematch_per_group,
    quality_metrics,
    total_nodematch,
    write_graph,
)
from .models.ergm import (
    ErgmParams,
    ErgmSpec,
    FitConfig,
    McmcConfig,
    ergm_change_statistics,
    ergm_statistics,
    fit_ergm,
    sample_ergm,
)
from .models.sbm import SbmParams, fit_sbm, sample_sbm
from .release import (
    INFINITE,
    PrivateRelease,
    ReleaseSpec,
    allocate_budget,
    global_sensitivity,
    release_statistics,
    sample_laplace,
    truncate_degree,
)

__version__ = "0.1.0"
