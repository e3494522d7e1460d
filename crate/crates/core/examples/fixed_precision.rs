//! Rounding, saturation and the finite attention span of a few float systems.

use ptlc::FloatSystem;

fn main() {
    let systems = [
        ("minifloat(4,3)", FloatSystem::default_system()),
        ("half grid", FloatSystem::fixed_grid(0.5, 64.0).unwrap()),
        ("integer grid", FloatSystem::fixed_grid(1.0, 64.0).unwrap()),
        ("S6", FloatSystem::explicit(&[-1.0, -0.25, 0.0, 0.25, 0.5, 1.0]).unwrap()),
    ];
    for (name, sys) in &systems {
        println!(
            "{name:>14}: {} values, min_pos {}, max_fin {}, N_max {}",
            sys.len(),
            sys.min_pos(),
            sys.max_fin(),
            sys.max_attention_span()
        );
    }

    let sys = FloatSystem::default_system();
    let third = sys.round_to(1.0 / 3.0);
    println!("\nround(1/3) = {}", sys.format(third));
    let big = sys.round_to(sys.max_fin());
    println!("max_fin + max_fin = {}", sys.format(sys.add(big, big).unwrap()));

    // 16 + 1 ties back to 16, so long uniform rows keep weight 1/16
    let ones = sys.sum(std::iter::repeat(sys.one()).take(40)).unwrap();
    println!("sum of forty ones = {}", sys.format(ones));

    for n in [2, 3, 5, 40] {
        let w = sys.softmax(&vec![sys.zero(); n]).unwrap();
        println!("uniform softmax over {n:>2}: weight {}", sys.format(w[0]));
    }

    let grid = FloatSystem::fixed_grid(1.0, 64.0).unwrap();
    for n in 1..=3 {
        let w = grid.softmax(&vec![grid.zero(); n]).unwrap();
        let shown: Vec<String> = w.iter().map(|&v| grid.format(v)).collect();
        println!("integer grid, {n} positions: [{}]", shown.join(", "));
    }
}
