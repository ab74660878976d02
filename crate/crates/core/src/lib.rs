//! K-mer queries over a set of equal-length sequencing reads, answered from
//! a pseudogenome (a superstring of the reads) and its sparse suffix array.

pub mod alphabet;
pub mod countcache;
pub mod error;
pub mod index;
pub mod ingest;
pub mod layout;
pub mod oracle;
pub mod persist;
pub mod pgbuild;
pub mod query;
pub mod saindex;

pub use alphabet::{Alphabet, PackedText, PackingScheme};
pub use error::{Error, Result};
pub use index::{BuildOptions, BuildReport, CacheChoice, PgsaIndex};
pub use ingest::{load_read_files, load_reads, Format, LengthPolicy, ReadSet};
pub use layout::{CacheLevels, ComponentSizes, Dimensions};
pub use persist::{load_index, save_index};
pub use query::{Occurrence, QueryAnswer, QueryInput, QueryKind, QuerySession};
