"""Online learning and adversarial bandits with GEV choice-model smoothing."""
from .bandit import (ArmOutcome, BanditState, bandit_estimate, bandit_init, bandit_sample,
                     bandit_step, expected_regret_bound, sample_arm)
from .choice_models import (GnlModel, Nest, choice_probabilities, generating_value, make_mnl,
                            make_nested_logit, perspective_gradient, perspective_surplus, surplus,
                            surplus_increment)
from .config import PRESETS, load_config, parse_config, preset_configs
from .environments import (AdversarialEnv, BernoulliEnv, draw_reward, env1, env2, env2_nested_logit,
                           random_adversarial, rng_stream)
from .errors import (ConfigError, DegenerateInputError, InvalidParameterError, InvalidPartitionError,
                     RewardRangeError)
from .experts import (experts_init, experts_regret, experts_step, optimal_eta, run_experts,
                      theoretical_regret_bound)
from .harness import AggregateResult, ExperimentConfig, RunTrace, aggregate, run_experiment, simulate
from .outputs import emit_outputs
from .verification import (check_alpha_bounds, check_diff_consistency, check_divergence_bound,
                           check_proposition1, check_strong_smoothness, diff_consistency_constant,
                           run_verification, smoothness_constant)

__version__ = "0.1.0"
