//! Negative-control switches.
//!
//! A tamper deliberately breaks one convention deep inside the machinery so
//! the verification suites can demonstrate they would catch it. Production
//! paths always run with `Tamper::None`.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tamper {
    #[default]
    None,
    /// Flip the Koszul sign rule in the coderivation assembly.
    KoszulSignFlip,
    /// Scale the Dupont homotopy by two.
    HomotopyScale,
    /// Add a term to the homotopy that violates the annihilation conditions.
    DropAnnihilation,
}

impl Tamper {
    pub fn parse(name: &str) -> Option<Tamper> {
        match name {
            "none" => Some(Tamper::None),
            "koszul-sign-flip" => Some(Tamper::KoszulSignFlip),
            "h-scale" => Some(Tamper::HomotopyScale),
            "drop-annihilation" => Some(Tamper::DropAnnihilation),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Tamper::None => "none",
            Tamper::KoszulSignFlip => "koszul-sign-flip",
            Tamper::HomotopyScale => "h-scale",
            Tamper::DropAnnihilation => "drop-annihilation",
        }
    }

    /// The verification suite this tamper is expected to break.
    pub fn named_suite(&self) -> Option<&'static str> {
        match self {
            Tamper::None => None,
            Tamper::KoszulSignFlip => Some("coderivation-squares-zero"),
            Tamper::HomotopyScale => Some("dupont-contraction"),
            Tamper::DropAnnihilation => Some("annihilation-conditions"),
        }
    }
}
