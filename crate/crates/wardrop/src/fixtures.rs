//! The bundled example networks, embedded from `fixtures/` at compile time.
//!
//! The same documents ship as files for the CLI; see the crate README.

use crate::io::parse_network_str;
use crate::network::Network;

macro_rules! fixture {
    ($(#[$doc:meta])* $name:ident, $file:literal) => {
        $(#[$doc])*
        pub fn $name() -> Network {
            parse_network_str(include_str!(concat!("../fixtures/", $file)))
                .expect(concat!("bundled fixture ", $file, " is valid"))
        }
    };
}

fixture!(
    /// Two parallel links o -> d with costs 1 and x.
    pigou,
    "pigou.json"
);
fixture!(
    /// The four-vertex diamond with the zero-cost shortcut u -> v.
    braess,
    "braess.json"
);
fixture!(
    /// Four vertices with a two-edge cycle between u and v; affine costs.
    cyclic,
    "cyclic.json"
);
fixture!(
    /// Two vertices, two commodities in opposite directions, a parallel
    /// pair of links each way.
    double_pigou,
    "double_pigou.json"
);
fixture!(
    /// Two parallel links with costs x^2 + x and x^2 + x + 1; not BPR-typed.
    two_link_nonbpr,
    "two_link_nonbpr.json"
);
