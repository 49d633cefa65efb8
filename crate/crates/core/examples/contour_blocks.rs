//! Double contour integrals of the bracket defect over pairs of generator
//! circles, and the sign of the diagonal bracket integral.

use schottky_lax::config::{make_reference, ReferenceKind, DEFAULT_SEED};
use schottky_lax::liealg::Side;
use schottky_lax::verify::Verifier;

fn main() -> schottky_lax::Result<()> {
    let cfg = make_reference(ReferenceKind::Genus2, DEFAULT_SEED)?;
    let verifier = Verifier::new(&cfg)?;
    let casimir = cfg.algebra.casimir();
    for b in verifier.contour_blocks()? {
        print!("C{}{}: ‖C‖ {:.1e}, ‖∫∫{{ξ,ξ}}‖ {:.3e}, nodes {}", b.i + 1, b.j + 1, b.defect.norm(), b.bracket.norm(), b.nodes);
        if b.i == b.j {
            let p = casimir.commutator_with(&cfg.phase.xi[b.i], Side::First);
            print!(", ‖∫∫ − [P,ξ]‖ {:.2e}, ‖∫∫ + [P,ξ]‖ {:.2e}", (&b.bracket - &p).norm(), (&b.bracket + &p).norm());
        }
        println!();
    }
    Ok(())
}
