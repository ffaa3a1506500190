"""Open-ended 3D object categorization from orthographic point-cloud views.

The pipeline renders pose/scale-invariant orthographic depth and color
views of a segmented object cloud, picks the most informative color view by
entropy, embeds views through pluggable CNN backbones across several
colorspaces, fuses shape and color blocks with a scalar weight, and feeds
an instance-based open-ended learner. A simulated teacher drives
test-then-train evaluation; a CLI and HTTP service expose the same loop
interactively.
"""

from .backbones import (BackboneSpec, BackendConfig, DENSENET_SPEC, FallbackBackend,
                        MOBILENET_SPEC, OnnxBackend, fallback_descriptor)
from .clouds import (DatasetIndex, DatasetView, ObjectCloud, load_cloud,
                     load_dataset_index, parse_csv, parse_pcd, serialize_csv,
                     serialize_pcd)
from .colorspaces import (COLORSPACES, ColorConvertedView, NATIVE_RANGES, convert,
                          convert_array)
from .config import DEFAULT_SPACES, PipelineConfig, load_config, save_config
from .entropy import EntropyReport, image_entropy, select_max_entropy
from .errors import (BackendError, DegenerateCloud, EmptyDataset, EmptyInput,
                     EmptyView, InvalidColorspace, InvalidFeature, InvalidMatrix,
                     IoError, LayoutError, LogError, OrthoLearnError, ParseError)
from .estimators import InstanceBasedClassifier, ObjectRepresenter
from .features import (FeatureLayout, FeatureVector, ObjectRepresentation,
                       embed_color, embed_shape, fuse, represent_object)
from .frames import (CovarianceSummary, LocalReferenceFrame, centroid,
                     construct_lrf, eigen3_symmetric, transform_to_lrf)
from .learner import PerceptualMemory, Prediction, cosine_distance
from .projection import (ColorImage, DepthImage, ViewTriplet, fit_bounds,
                         render_views, save_view_images)
from .teacher import (AdversarialAgent, ExperimentLog, MetricsReport, OracleAgent,
                      PipelineAgent, TeacherConfig, compute_metrics, run_experiment,
                      run_experiments, summarize_runs)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
