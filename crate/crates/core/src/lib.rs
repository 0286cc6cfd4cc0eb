//! Graph contrastive learning with a learnable, homophily-driven sanitation
//! view.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: attributed graphs, normalized adjacency, Laplacian, label and
//!   feature homophily, normalized cut, SBM generation.
//! - [`autodiff`]: a dense reverse-mode tape.
//! - [`encoder`]: two-layer GCN and the projection head.
//! - [`contrastive`]: cosine similarity, infoNCE, mutual-information estimate.
//! - [`sanitizer`]: Gumbel edge-drop masks and budgeted projected descent.
//! - [`trainer`]: joint training, pseudo normalized cut selection, η sweeps.
//! - [`attacks`]: heterophily injection and a greedy contrastive attacker.
//! - [`eval`]: logistic regression, k-means/NMI, GRV, reports.
//! - [`io`]: the text formats used on disk.

// `!(x > 0.0)` style guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attacks;
pub mod autodiff;
pub mod contrastive;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod optim;
pub mod sanitizer;
pub mod seed;
pub mod trainer;

pub use error::{Error, Result};
pub use graph::{Edge, Graph};
