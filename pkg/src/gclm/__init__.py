"""Gaussian-centered L-moments: robust summary statistics, screening,
enrichment analysis, and influence-function diagnostics."""

from .distributions import (QuantileDistribution, TukeyGH, exponential,
                            sample_distribution, spawn_streams,
                            standard_gaussian, tukey_gh, tukey_gh_quantile,
                            tukey_gh_transform, uniform)
from .errors import (DegenerateSampleError, DomainError, GclmError,
                     InsufficientSampleError, NonConvergenceError, ParseError)
from .gaussian import (expected_spacing_gaussian, order_statistic_table,
                       rl_polynomial_constants, rl_transform_constants,
                       std_normal_cdf, std_normal_pdf, std_normal_quantile)
from .gsea import (EnrichmentResult, GeneSet, GeneSetCollection,
                   compare_estimators, enrichment_report, enrichment_score,
                   fdr, fisher_exact_comparison, fisher_exact_two_sided,
                   load_gmt, permutation_null, permutation_p_values)
from .moments import (STATISTIC_IDS, Sample, SummaryCalculator,
                      SummaryStatistics, bowley_skewness, compute_summary,
                      conventional_sample_skewness_kurtosis,
                      hl_bias_correction, raw_quantile_moment,
                      ruppert_kurtosis, sample_hl_moment_ratios,
                      sample_hl_moments, sample_l_moment_ratios,
                      sample_l_moments, sample_quantile, sample_rl_moments,
                      theoretical_moment, theoretical_moment_ratio)
from .polynomials import (eval_hermite, eval_shifted_legendre,
                          hermite_coefficients, shifted_legendre_coefficients)
from .robustness import (EXPECTED_GROWTH_ORDERS, ContaminationSpec,
                         GrowthOrderEstimate, InfluenceEstimate,
                         contaminated_quantile, evaluate_functional,
                         growth_order, influence_estimate,
                         sif_equals_if_check)
from .screening import (DataMatrix, RankedList, bottom_k,
                        export_marginal_plot_data, load_matrix, screen)

__version__ = "0.1.0"
