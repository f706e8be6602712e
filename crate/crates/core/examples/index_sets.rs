//! Total-degree and hyperbolic index sets, admissible expansion and the text
//! dump format.

use sparse_pce::multiindex::{expand, hyperbolic_set, total_degree_set, IndexSet, MultiIndex};

fn main() -> sparse_pce::Result<()> {
    let td = total_degree_set(2, 2)?;
    println!("total degree d=2 p=2 ({} terms):", td.len());
    for idx in td.iter() {
        println!("  {idx}");
    }

    for q in [1.0, 0.75, 0.5] {
        println!("hyperbolic d=5 p=6 q={q}: {} terms", hyperbolic_set(5, 6, q)?.len());
    }

    let seed = IndexSet::from_indices(2, [MultiIndex::new(vec![0, 0]), MultiIndex::new(vec![1, 0])])?;
    let grown = expand(&seed);
    println!(
        "expand {{(0,0),(1,0)}} -> {{{}}}",
        grown.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
    );

    let mut buf = Vec::new();
    grown.write_text(&mut buf)?;
    print!("text dump:\n{}", String::from_utf8_lossy(&buf));
    Ok(())
}
