use proptest::prelude::*;
use richards_cem::mesh::{default_layers, CoarsePartition, StructuredGrid};

#[test]
fn grid_counts() {
    assert_eq!(StructuredGrid::new(128).unwrap().interior_dofs(), 16129);
    assert_eq!(StructuredGrid::new(2).unwrap().interior_dofs(), 1);
    let g = StructuredGrid::new(8).unwrap();
    let on_edge = (0..g.node_count())
        .filter(|&k| {
            let (x, y) = g.node_position(k);
            x == 0.0 || x == 1.0 || y == 0.0 || y == 1.0
        })
        .count();
    assert_eq!(g.boundary_node_count(), on_edge);
    assert_eq!(on_edge, 32);
    assert!(StructuredGrid::new(1).is_err());
}

#[test]
fn coarse_sizes() {
    let g = StructuredGrid::new(128).unwrap();
    let p = CoarsePartition::new(&g, 4).unwrap();
    assert_eq!(p.block_count(), 16);
    assert!(p.blocks().iter().all(|b| b.cells.len() == 32 * 32));
    assert_eq!(CoarsePartition::new(&g, 32).unwrap().block_count(), 1024);
    assert!(CoarsePartition::new(&g, 6).is_err());
}

#[test]
fn layer_rule_examples() {
    let got: Vec<usize> = [4, 8, 16, 32, 64].iter().map(|&h| default_layers(h).unwrap()).collect();
    assert_eq!(got, vec![3, 5, 7, 8, 10]);
}

#[test]
fn neighbourhood_sizes() {
    let g = StructuredGrid::new(16).unwrap();
    let p = CoarsePartition::new(&g, 4).unwrap();
    let interior = p.block_id(1, 2);
    assert_eq!(p.oversample(&g, interior, 1).unwrap().member_blocks.len(), 9);
    assert_eq!(p.oversample(&g, 0, 1).unwrap().member_blocks.len(), 4);
    let full = p.oversample(&g, interior, 4).unwrap();
    assert_eq!(full.cells.len(), g.cell_count());
    assert_eq!(full.interior_nodes.len(), g.interior_dofs());
    assert!(p.oversample(&g, 0, 5).is_err());
}

fn grid_and_hdiv() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=6, 1usize..=4).prop_map(|(hdiv, f)| (hdiv * f, hdiv))
}

proptest! {
    #[test]
    fn blocks_partition_the_cells((n, hdiv) in grid_and_hdiv()) {
        let g = StructuredGrid::new(n).unwrap();
        let p = CoarsePartition::new(&g, hdiv).unwrap();
        let mut seen = vec![0u32; g.cell_count()];
        for b in p.blocks() {
            for &c in &b.cells {
                seen[c] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn hats_sum_to_one_with_bounded_gradients((n, hdiv) in grid_and_hdiv()) {
        let g = StructuredGrid::new(n).unwrap();
        let p = CoarsePartition::new(&g, hdiv).unwrap();
        let mut sum = vec![0.0; g.node_count()];
        for k in 0..p.coarse_node_count() {
            for (node, v) in p.hat_on_nodes(&g, k) {
                sum[node] += v;
            }
        }
        prop_assert!(sum.iter().all(|s| (s - 1.0).abs() <= 1e-12));
        // Component-wise the largest slope of a hat is 1/H, reached on its
        // support edges.
        let inv_h = hdiv as f64;
        for k in 0..p.coarse_node_count() {
            let (x, y) = p.coarse_node_position(k);
            let half = 0.5 / inv_h;
            let probes = [(x - half, y), (x + half, y), (x, y - half), (x, y + half)];
            let mut worst = 0.0f64;
            for (px, py) in probes {
                if (0.0..=1.0).contains(&px) && (0.0..=1.0).contains(&py) {
                    let (gx, gy) = p.hat_gradient(k, px, py);
                    worst = worst.max(gx.abs()).max(gy.abs());
                }
            }
            prop_assert!((worst - inv_h).abs() <= 1e-9 * inv_h);
            for (px, py) in [(x + 0.3 * half, y + 0.7 * half), (x - 0.9 * half, y - 0.2 * half)] {
                if (0.0..=1.0).contains(&px) && (0.0..=1.0).contains(&py) {
                    let (gx, gy) = p.hat_gradient(k, px, py);
                    prop_assert!(gx.abs() <= inv_h * (1.0 + 1e-12) && gy.abs() <= inv_h * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn oversampling_is_nested_and_clipped((n, hdiv) in grid_and_hdiv(), pick in any::<usize>()) {
        let g = StructuredGrid::new(n).unwrap();
        let p = CoarsePartition::new(&g, hdiv).unwrap();
        let j = pick % p.block_count();
        let r0 = p.oversample(&g, j, 0).unwrap();
        prop_assert_eq!(&r0.cells, &{
            let mut c = p.block(j).cells.clone();
            c.sort_unstable();
            c
        });
        let mut prev = r0;
        for m in 1..=hdiv {
            let r = p.oversample(&g, j, m).unwrap();
            prop_assert!(prev.nodes.iter().all(|v| r.nodes.contains(v)));
            prop_assert!(r.member_blocks.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(r.interior_nodes.iter().all(|&v| !g.is_boundary(v)));
            prop_assert!(r.nodes.iter().all(|&v| v < g.node_count()));
            prev = r;
        }
        prop_assert_eq!(prev.cells.len(), g.cell_count());
    }
}
