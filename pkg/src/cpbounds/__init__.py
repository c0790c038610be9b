"""Split conformal prediction with computable expected-set-size bounds."""

from .bounds import (
    BOUND_RESULT_FIELDS,
    ORACLE_SLACK,
    BoundQuery,
    BoundResult,
    SlackSpec,
    beta_slack,
    binary_kl,
    binomial_tail_exact,
    classification_set_size_bound,
    expected_set_size_bound,
    mu_slack,
    r_min,
    regression_set_size_bound,
)
from .calibration import (
    FULL_SPACE,
    CalibrationSet,
    MonteCarloSummary,
    PredictionSet,
    TrialDraw,
    conformal_quantile,
    empirical_cal_cdf,
    estimate_coverage_and_size,
    n_alpha,
    predict_set,
)
from .cdf_models import (
    CdfEstimate,
    cdf_from_csv,
    cdf_to_csv,
    generalization_gap,
    grid_cdf,
    population_cdf_mc,
    step_cdf_from_scores,
    training_cdf,
)
from .dataio import (
    CsvSchema,
    Dataset,
    Split,
    generate_synthetic,
    load_csv,
    regression_landscape,
    save_csv,
    split_dataset,
)
from .harness import (
    RECORD_CSV_COLUMNS,
    ExperimentConfig,
    SweepError,
    TrialRecord,
    config_from_dict,
    load_config,
    make_score_trial_sampler,
    render_report,
    run_sweep,
    run_trial,
)
from .learners import (
    LogisticModel,
    MlpRegressor,
    ModelEnsemble,
    TrainConfig,
    draw_model,
    ensemble_accuracy,
    flat_params,
    load_ensemble,
    loss_and_gradient,
    predict,
    save_ensemble,
    train_classifier,
    train_regressor,
    with_params,
)
from .quadrature import QuadratureError, adaptive_simpson
from .scores import (
    Discrete,
    GammaDensity,
    Interval,
    LabelSpace,
    ScoreSpec,
    gamma_closed_form,
    gamma_empirical,
    label_measure,
    lp_power_score,
    nc_score,
    zero_one_score,
)

__version__ = "0.1.0"
