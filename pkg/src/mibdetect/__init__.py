"""DoS anomaly detection from SNMP-MIB IP-group counters.

Tree classifiers (C4.5-style, reduced-error-pruned, random forest), filter
attribute evaluators (InfoGain with MDL discretization, ReliefF) and
cross-validated one-vs-rest metrics.
"""

__version__ = "0.1.0"

from .dataset import (IP_GROUP, IP_GROUP_FEATURES, Dataset, FoldPlan, MibSchema,
                      class_distribution, load_csv, project, read_csv, stratified_folds,
                      write_csv)
from .errors import MibError
from .evaluate import (ConfusionMatrix, EvalReport, Learner, accuracy, class_metrics,
                       confusion, cross_validate, weighted_metrics)
from .featsel import Ranking, info_gain_scores, mdl_discretize, relieff_scores, top_n
from .forest import ForestConfig, RandomForest, oob_error, predict_forest, train_forest
from .synth import AttackProfile, ScenarioConfig, default_scenario, generate
from .trees import DecisionTree, TreeConfig, best_split, entropy, grow_c45, grow_rep, predict
