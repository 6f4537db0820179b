//! Discrete singular cubical homology of finite simple graphs.

pub mod cache;
pub mod cells;
pub mod chain;
pub mod cover;
pub mod cube;
pub mod error;
pub mod graph;
pub mod homology;
pub mod linalg;
pub mod subdivision;

pub use cells::{
    build_filled_complex, cellular_homology, compare_covering, covering_complex_homology,
    mv_span_check, CellComplex2,
};
pub use chain::{boundary, Chain};
pub use cube::{
    enumerate_cubes, validate_cube, visit_cubes, CubeBasis, EnumOptions, Restriction, Sign,
    SingularCube,
};
pub use error::{Error, Result};
pub use graph::{from_token, parse_graph, Graph, Vertex};
pub use homology::{
    assemble_complex, homology, homology_of, homology_of_with, homology_two_point, AssembleOptions,
    ChainComplex, HomologyOptions, HomologyResult, Ring,
};
