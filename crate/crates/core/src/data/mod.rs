//! Motion data: frames of eight arm joint angles, preprocessing, synthetic
//! demonstrations, simulated data loss and the on-disk format.

pub mod corrupt;
pub mod io;
pub mod preprocess;
pub mod sequence;
pub mod skeleton;
pub mod synthetic;

pub use corrupt::{corrupt_dropout, Dropout, DEFAULT_CHUNK_FRAMES, MAX_LOSS_FRACTION};
pub use io::{load_dataset, load_sequence, save_dataset, save_sequence, ManifestEntry};
pub use preprocess::{downsample_sequence, median_downsample};
pub use sequence::{Frame, JointLimits, MotionSequence, DEFAULT_FPS, FRAME_DIM, JOINT_NAMES};
pub use skeleton::{angles_from_skeleton, ArmPoints, SkeletonFrame};
pub use synthetic::{generate_synthetic, Pattern, PatternKind, Side, SyntheticSpec, DEFAULT_SUITE};
