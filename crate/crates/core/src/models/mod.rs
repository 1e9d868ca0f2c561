//! The worked models.

pub mod cauchy;
pub mod curved_normal;
pub mod eiv;
pub mod laplace;

pub use cauchy::{cauchy_posterior_contour, CauchyLocationModel};
pub use curved_normal::{
    curved_normal_posterior_contour, curved_normal_reduce, ConditionalDensity, CurvedNormalConditional,
    CurvedNormalModel, CurvedNormalReduction, DensityForm,
};
pub use eiv::{eiv_posterior_contour, EivAssociation, EivModel};
pub use laplace::{asymmetric_laplace_cdf, asymmetric_laplace_quantile};
