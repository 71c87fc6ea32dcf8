/// Enumeration guards shared by the exhaustive routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guards {
    /// Largest vertex count for subset enumeration (reachable and intrinsic sets).
    pub max_subset_vertices: usize,
    /// Largest number of joint error configurations the oracle will enumerate.
    pub max_error_configurations: u128,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            max_subset_vertices: 16,
            max_error_configurations: 10_000_000,
        }
    }
}
