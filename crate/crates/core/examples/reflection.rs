//! The reflection that maps one pixel onto another, applied to points,
//! vectors and curves.

use symmpix::reflection::ReflectionTransform;
use symmpix::Vec2;

fn main() -> symmpix::Result<()> {
    let (a, b) = (Vec2::new(10.0, 4.0), Vec2::new(30.0, 12.0));
    let t = ReflectionTransform::from_pair(a, b)?;
    println!(
        "axis angle {:.4} rad through ({:.1}, {:.1})",
        t.theta(),
        t.midpoint().x,
        t.midpoint().y
    );

    let m = t.matrix();
    println!("matrix [[{:.3}, {:.3}], [{:.3}, {:.3}]]", m[0][0], m[0][1], m[1][0], m[1][1]);
    println!("det {:.3}", m[0][0] * m[1][1] - m[0][1] * m[1][0]);

    let p = Vec2::new(3.0, -7.0);
    let q = t.reflect_point(p);
    println!("{p:?} -> {q:?} -> {:?}", t.reflect_point(q));
    println!("a -> {:?}", t.reflect_point(a));
    println!("signed distance of a: {:.3}", t.signed_distance(a));
    Ok(())
}
