//! Ready-made actions and candidate families.
//!
//! For `F_2 × Z` acting on a product `Y × R`:
//! - [`product`]: unit tree, `F_2` acts only horizontally;
//! - [`twisted`]: unit tree, `b` also shifts the line by 1;
//! - [`stretched`]: tree with `b`-edges of length 2;
//! - [`diamond`]: diamond complex, untwisted;
//! - [`star`]: diamond complex, `b` shifts the line by 1.
//!
//! [`gamma`], [`gamma_prime`] and [`diamond_f2`] are the `F_2` actions on
//! the bare horizontal spaces.

use crate::actions::ActionSpec;
use crate::freegroup::Ambient;
use crate::sequences::SequenceFamily;
use crate::syntax::parse_family_file;

pub const PRODUCT_JSON: &str = include_str!("../fixtures/product.json");
pub const TWISTED_JSON: &str = include_str!("../fixtures/twisted.json");
pub const STRETCHED_JSON: &str = include_str!("../fixtures/stretched.json");
pub const DIAMOND_JSON: &str = include_str!("../fixtures/diamond.json");
pub const STAR_JSON: &str = include_str!("../fixtures/star.json");
pub const GAMMA_JSON: &str = include_str!("../fixtures/gamma.json");
pub const GAMMA_PRIME_JSON: &str = include_str!("../fixtures/gamma_prime.json");
pub const DIAMOND_F2_JSON: &str = include_str!("../fixtures/diamond_f2.json");
pub const STANDARD_SUITE: &str = include_str!("../fixtures/std.txt");
pub const STANDARD_SUITE_F2: &str = include_str!("../fixtures/std_f2.txt");
pub const FAN_FAMILIES: &str = include_str!("../fixtures/table3d.txt");

fn load(json: &str) -> ActionSpec {
    ActionSpec::from_json(json).expect("bundled fixture parses")
}

pub fn product() -> ActionSpec {
    load(PRODUCT_JSON)
}

pub fn twisted() -> ActionSpec {
    load(TWISTED_JSON)
}

pub fn stretched() -> ActionSpec {
    load(STRETCHED_JSON)
}

pub fn diamond() -> ActionSpec {
    load(DIAMOND_JSON)
}

pub fn star() -> ActionSpec {
    load(STAR_JSON)
}

pub fn gamma() -> ActionSpec {
    load(GAMMA_JSON)
}

pub fn gamma_prime() -> ActionSpec {
    load(GAMMA_PRIME_JSON)
}

pub fn diamond_f2() -> ActionSpec {
    load(DIAMOND_F2_JSON)
}

/// The 24-family suite over `F_2 × Z`.
pub fn standard_suite() -> Vec<SequenceFamily> {
    parse_family_file(STANDARD_SUITE, Ambient { m: 2, d: 1 }).expect("bundled suite parses")
}

/// The six pure `F_2` families.
pub fn standard_suite_f2() -> Vec<SequenceFamily> {
    parse_family_file(STANDARD_SUITE_F2, Ambient { m: 2, d: 0 }).expect("bundled suite parses")
}

/// `a^n b^{∓n²}` and `a^n (ab^{∓1})^{n²}` over `F_2 × Z`.
pub fn fan_families() -> Vec<SequenceFamily> {
    parse_family_file(FAN_FAMILIES, Ambient { m: 2, d: 1 }).expect("bundled families parse")
}
