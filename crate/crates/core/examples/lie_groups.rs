//! Rotations, SE(3) elements and the coadjoint pairing.
//!
//! `cargo run --release --example lie_groups`

use clpnet::lie::{ad_se3, ad_star_se3, basis_rotation, hat, rot, se3_compose, se3_inverse, vee, SE3Element};
use clpnet::Vec3;

fn main() -> clpnet::Result<()> {
    let w = Vec3::new(0.3, -1.2, 2.0);
    println!("hat(w) =\n{}", hat(&w));
    println!("vee(hat(w)) = {:?}", vee(&hat(&w)).as_slice());

    let r = rot(&Vec3::new(1.0, 1.0, 0.0), 0.7)?;
    let back = r.compose(&rot(&Vec3::new(1.0, 1.0, 0.0), -0.7)?);
    println!("|R(a,φ) R(a,-φ) - I| = {:.1e}", (back.into_inner() - clpnet::Mat3::identity()).amax());
    println!("quarter turn about e3 maps e1 to {:?}", (basis_rotation(2, std::f64::consts::FRAC_PI_2) * Vec3::x()).as_slice());

    let g = SE3Element::new(r, Vec3::new(1.0, 0.0, -2.0));
    let id = se3_compose(&g, &se3_inverse(&g));
    println!("g g⁻¹ translation {:?}", id.trans.as_slice());

    let (a, b) = (Vec3::new(0.1, 0.2, 0.3), Vec3::new(-1.0, 0.5, 0.0));
    let (big_a, big_b) = (Vec3::new(1.0, -1.0, 2.0), Vec3::new(0.0, 3.0, 1.0));
    let (c, d) = (Vec3::new(0.4, 0.0, -0.2), Vec3::new(1.0, 1.0, 1.0));
    let (sa, sb) = ad_star_se3(&a, &b, &big_a, &big_b);
    let (xa, xb) = ad_se3(&a, &b, &c, &d);
    println!(
        "<ad* μ, η> = {:.15}, <μ, ad η> = {:.15}",
        sa.dot(&c) + sb.dot(&d),
        big_a.dot(&xa) + big_b.dot(&xb)
    );
    Ok(())
}
