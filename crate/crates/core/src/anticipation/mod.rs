//! Anticipative strategies layered on the hybrid planner: the turn
//! sequence (AT), robot + pedestrian rollouts (ARP) and virtual
//! pedestrian circles injected into the scan (APP).

pub mod app;
pub mod arp;
pub mod at;

pub use app::{app_augment_scan, app_generate, app_truncate_on_hit, AnticipativeCircle, AppConfig};
pub use arp::{arp_select, ArpConfig, LocalMap};
pub use at::{at_predict_collision, at_predict_collision_with, at_step, AT_DEFAULT_MARGIN, moving_obstacle_near, AtPhase, AtState, AT_ADVANCE_STEPS, AT_TURN_STEPS};
