"""aspecttag: recurrent sequence taggers for aspect term extraction and
aspect-level sentiment, written on a small numpy autodiff core.

The heavy recurrent loops run in a compiled extension when it was built;
set ``ASPECTTAG_PURE_PYTHON=1`` to force the numpy fallback.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .evaluation import EvalReport, conlleval_f1, evaluate, evaluate_model, ttest_two_sided
from .models import ModelConfig, Tagger
from .training import TrainConfig, kfold_split, train

__all__ = ["BACKEND", "EvalReport", "ModelConfig", "Tagger", "TrainConfig", "conlleval_f1",
           "evaluate", "evaluate_model", "kfold_split", "train", "ttest_two_sided", "__version__"]
