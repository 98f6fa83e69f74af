//! Hierarchical distribution matching for probabilistically shaped QAM.
//!
//! A tree of lookup tables turns `N_in` uniform information bits into a
//! fixed-length word of amplitude-class symbols whose distribution favours
//! low-energy classes. The crate builds the tree from a layer table
//! ([`tree_config`]), fills the LUTs by energy ranking ([`lut_synthesis`]),
//! runs the matcher and its exact inverse ([`codec`]), and measures the
//! resulting signal against a constant-composition matcher ([`ccdm`]) and
//! the Maxwell-Boltzmann optimum ([`mb_solver`]) in [`analysis`].
//!
//! ```
//! use hidm::{codec, config::ToolConfig, BitWord};
//!
//! let set = ToolConfig::bundled().synthesize().unwrap();
//! let info = BitWord::zeros(set.spec().n_info());
//! let shaped = codec::encode(&set, &info).unwrap();
//! assert_eq!(shaped.len(), 640);
//! assert_eq!(codec::decode(&set, &shaped).unwrap(), info);
//! ```

pub mod analysis;
pub mod bits;
pub mod ccdm;
pub mod codec;
pub mod config;
pub mod datafile;
pub mod lut_synthesis;
pub mod lutfile;
pub mod mb_solver;
pub mod selftest;
pub mod sequence;
pub mod symbol_map;
pub mod tree_config;

pub use bits::BitWord;
pub use ccdm::{CcdmCode, Composition};
pub use lut_synthesis::{ClassEnergyTable, Lut, LutSet};
pub use sequence::ClassSequence;
pub use tree_config::{LayerParams, TreeSpec};
