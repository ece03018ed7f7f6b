use alloc::vec::Vec;

use crate::bbox::BBox;

/// A 4-connected foreground region.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub area: u64,
    pub bbox: BBox,
}

/// Per-pixel labels (0 = background, components numbered from 1 in
/// raster order of their first pixel) and the component summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    pub labels: Vec<u32>,
    pub components: Vec<Component>,
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

/// Two-pass union-find labeling of `mask` with 4-connectivity.
pub fn label_components(mask: &[bool], width: u32, height: u32) -> Labeling {
    let (w, h) = (width as usize, height as usize);
    assert_eq!(mask.len(), w * h, "mask size does not match dimensions");
    let mut provisional = alloc::vec![0u32; w * h];
    // parent[0] is the background sentinel
    let mut parent: Vec<u32> = alloc::vec![0];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !mask[i] {
                continue;
            }
            let left = if x > 0 { provisional[i - 1] } else { 0 };
            let up = if y > 0 { provisional[i - w] } else { 0 };
            provisional[i] = match (left, up) {
                (0, 0) => {
                    let id = parent.len() as u32;
                    parent.push(id);
                    id
                }
                (l, 0) => l,
                (0, u) => u,
                (l, u) => {
                    let (rl, ru) = (find(&mut parent, l), find(&mut parent, u));
                    let (lo, hi) = (rl.min(ru), rl.max(ru));
                    parent[hi as usize] = lo;
                    lo
                }
            };
        }
    }

    // Second pass: resolve roots and renumber in raster order.
    let mut final_id = alloc::vec![0u32; parent.len()];
    let mut labels = alloc::vec![0u32; w * h];
    let mut extents: Vec<(u64, u32, u32, u32, u32)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if provisional[i] == 0 {
                continue;
            }
            let root = find(&mut parent, provisional[i]) as usize;
            if final_id[root] == 0 {
                extents.push((0, u32::MAX, u32::MAX, 0, 0));
                final_id[root] = extents.len() as u32;
            }
            let id = final_id[root];
            labels[i] = id;
            let e = &mut extents[id as usize - 1];
            let (xu, yu) = (x as u32, y as u32);
            e.0 += 1;
            e.1 = e.1.min(xu);
            e.2 = e.2.min(yu);
            e.3 = e.3.max(xu + 1);
            e.4 = e.4.max(yu + 1);
        }
    }
    let components = extents
        .into_iter()
        .map(|(area, x0, y0, x1, y1)| Component {
            area,
            bbox: BBox::new(x0, y0, x1, y1).expect("component extents are non-empty"),
        })
        .collect();
    Labeling { labels, components }
}
