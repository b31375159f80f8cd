"""Bird's-eye human-machine interaction toolkit.

Panoramic view geometry, ground-plane homography calibration, pose-stream
lifting and tracking, virtual ground sensors with debounced events, a
deterministic scenario simulator, and a replay/live service tying it all
together.
"""

from .calibration import (
    BodyModel,
    Correspondence,
    Homography,
    ViewCalibration,
    estimate_homography,
    keypoint_height,
    lift_at_height,
    lift_ground,
)
from .errors import (
    BirdsEyeError,
    ConfigError,
    DegenerateError,
    DomainError,
    HorizonError,
    StreamError,
    TeachError,
)
from .geometry import (
    PanoramicCamera,
    RectilinearView,
    default_views,
    direction_to_pano_pixel,
    pano_pixel_to_direction,
    view_pixel_to_direction,
    view_to_pano_pixel,
    world_point_to_view_pixel,
)
from .pipeline import (
    Detection,
    EntityState,
    PoseFrame,
    PosePipeline,
    RobotProfile,
    Tracker,
    body_orientation,
    localize_detection,
    merge_observations,
)
from .sensors import (
    BarrierGeometry,
    InteractionEvent,
    MatGeometry,
    OrientedMatGeometry,
    ProximityGeometry,
    SensorEngine,
    VirtualSensor,
    point_in_polygon,
    proximity_level,
    segment_crossing,
)
from .simulator import Actor, Scenario, render_frame, skeleton_at
from .teach import TeachSession, finalize, record

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
