//! Sample splittings used by tests, benches and the CLI docs.

use crate::splitting::SplittingSpec;

macro_rules! sample {
    ($name:ident, $file:literal, $doc:literal) => {
        #[doc = $doc]
        pub fn $name() -> SplittingSpec {
            SplittingSpec::from_json(include_str!(concat!("../data/", $file)))
                .expect("bundled sample parses")
        }
    };
}

sample!(z2_z3, "z2_z3.json", "`Z2 * Z3 = <a> * <b>`.");
sample!(z3_z4, "z3_z4.json", "`Z3 * Z4 = <a> * <b>`.");
sample!(z2_z2, "z2_z2.json", "`Z2 * Z2`, the infinite dihedral group.");
sample!(trivial_z5, "trivial_z5.json", "`{1} * Z5`.");
sample!(z_z, "z_z.json", "`Z * Z = <x> * <y>`, the free group of rank 2.");
sample!(klein, "klein.json", "`<a> *_{a^2 = b^2} <b>`, with central edge group.");
sample!(
    f2_amalgam_f2,
    "f2_amalgam_f2.json",
    "`F(a,b) *_{a = c} F(c,d)`, a free group of rank 3 over a malnormal edge group."
);
sample!(s3_z4, "s3_z4.json", "`S3 *_{s = b^2} Z4`.");

pub fn all() -> Vec<SplittingSpec> {
    vec![
        z2_z3(),
        z3_z4(),
        z2_z2(),
        trivial_z5(),
        z_z(),
        klein(),
        f2_amalgam_f2(),
        s3_z4(),
    ]
}

/// `(name, spec)` pairs for lookup by name.
pub fn named() -> Vec<(&'static str, SplittingSpec)> {
    vec![
        ("z2_z3", z2_z3()),
        ("z3_z4", z3_z4()),
        ("z2_z2", z2_z2()),
        ("trivial_z5", trivial_z5()),
        ("z_z", z_z()),
        ("klein", klein()),
        ("f2_amalgam_f2", f2_amalgam_f2()),
        ("s3_z4", s3_z4()),
    ]
}
