//! Mallows-induced parking functions: exact laws, limit laws and Monte Carlo
//! checks.

pub mod error;
pub mod exact_laws;
pub mod limit_laws;
pub mod mallows;
pub mod mc;
pub mod parking;
pub mod perm;
pub mod pmf;
pub mod rng;
pub mod tv_explorer;

pub use error::{Error, Result};
pub use mallows::{sample_mallows, QSchedule};
pub use parking::{from_pair, is_parking, simulate_cars, CarOutcome, ParkingFunction};
pub use perm::{lehmer_decode, lehmer_encode, LehmerCode, Permutation};
pub use pmf::{tv_distance, DiscretePMF};
pub use rng::RandomStream;
