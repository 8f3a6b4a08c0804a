//! Random-matrix distributions and the tests built on them.

pub mod factors;
pub mod greatest_root;
pub mod marchenko_pastur;
pub mod painleve;
pub mod tracy_widom;
pub mod wishart;

pub use factors::{count_factors, Deflation, FactorCountReport, FactorRow};
pub use greatest_root::{
    greatest_root_params, greatest_root_pvalue, greatest_root_statistic, logit, GreatestRootParams,
};
pub use marchenko_pastur::{mp_density, mp_law, MarchenkoPasturLaw, RatioConvention};
pub use painleve::{solve_painleve_ii, PainleveSolution};
pub use tracy_widom::{tw_cdf, tw_quantile, tw_table, tw_tables_default, Beta, TableMeta, TracyWidomTable};
pub use wishart::{wishart_edge_scaling, wishart_largest_eig_pvalue, wishart_statistic};
