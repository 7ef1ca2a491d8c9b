//! External-memory construction of the extended Burrows-Wheeler transform,
//! the LCP array and (optionally) the generalized suffix array of a string
//! collection.
//!
//! The builder makes `K` right-to-left passes over the collection (`K` =
//! longest string), inserting one symbol per active string per pass into
//! segment files on disk. Internal memory holds one tracker per string plus
//! per-symbol running minima; every file is read forward and written
//! append-only, and the working set never exceeds two generations of
//! segment files.
//!
//! ```no_run
//! use ebwtlcp::builder::{build, BuildOptions};
//! use ebwtlcp::ingest::{CollectionSource, InputFormat};
//!
//! # fn main() -> ebwtlcp::error::Result<()> {
//! let source = CollectionSource::path("reads.fastq", InputFormat::Auto);
//! let opts = BuildOptions { with_gsa: true, ..BuildOptions::default() };
//! let summary = build(&source, "out/reads".as_ref(), "out/tmp".as_ref(), &opts, None)?;
//! println!("{} cells in {:?}", summary.meta.n, summary.counters.wall);
//! # Ok(())
//! # }
//! ```

pub mod alphabet;
pub mod bcr;
pub mod builder;
pub mod error;
pub mod extlcp;
pub mod gsa;
pub mod ingest;
pub mod io_audit;
pub mod meta;
pub mod oracle;
pub mod segstore;
pub mod verify;

pub use alphabet::{Alphabet, CollectionMeta};
pub use builder::{build, BuildOptions, BuildSummary};
pub use error::{Error, Result};
pub use ingest::{CollectionSource, InputFormat};
pub use verify::{audit_build, invert_ebwt, verify_outputs};
