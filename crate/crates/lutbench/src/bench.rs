//! Placeholder while bootstrapping; replaced by the real module.
