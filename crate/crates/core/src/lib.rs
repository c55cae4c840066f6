// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Echo-chamber and bipartisan-user analysis for retweet networks.
//!
//! The crate is organised as a pipeline:
//!
//! - [`ingest`]: tweet and polarity-probability files, keyword filtering,
//!   text normalisation.
//! - [`polarity`]: tweet scores, user scores and user categories.
//! - [`netgraph`]: the weighted directed retweet graph.
//! - [`community`]: Louvain detection, modularity and community polarity.
//! - [`stats`]: correlation, Kruskal-Wallis, Dunn, ECDFs and density grids.
//! - [`experiments`]: homophily, census, influence and node-removal analyses.
//! - [`synth`]: planted echo-chamber datasets with ground truth.
//! - [`config`], [`pipeline`] and [`svg`]: end-to-end runs and figures.

pub mod community;
pub mod config;
pub mod error;
pub mod experiments;
pub mod ingest;
pub mod io;
pub mod netgraph;
pub mod pipeline;
pub mod polarity;
pub mod stats;
pub mod svg;
pub mod synth;

pub use error::{Error, Result};
