//! Photon-number statistics of squeezed vacua, loss and g² formulas.

mod distribution;
mod fock;
mod squeezed;

pub use distribution::{
    apply_binomial_loss, g2_cross, g2_from_pn, signal_with_leakage, JointPhotonNumberDistribution,
    PhotonNumberDistribution, DEFAULT_NMAX, TAIL_TOLERANCE,
};
pub use fock::{beamsplitter_amplitudes, beamsplitter_mix, beamsplitter_probabilities};
pub use squeezed::{
    log_range, mean_photons_to_squeezing_db, multimode_joint_pn, nmax_for_tail, smsv_pn, squeeze_parameter,
    theory_curves, tmsv_joint_pn, SqueezerSpec, TheoryPoint,
};
