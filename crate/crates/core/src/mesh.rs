//! Background mesh, interfaces, per-subdomain active meshes and the
//! macro-element partition.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CutDgError, Result};

/// Smallest admissible cut fraction; smaller ones are clamped.
pub const MIN_CUT_FRACTION: f64 = 1e-12;
/// Lower end of the random scaling `s` of the cut fractions.
pub const MIN_CUT_SCALE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundMesh {
    pub x_left: f64,
    pub x_right: f64,
    pub n_elements: usize,
    pub h: f64,
}

impl BackgroundMesh {
    /// Coordinate of edge `j` (`0..=n_elements`).
    pub fn edge(&self, j: usize) -> f64 {
        if j == self.n_elements {
            self.x_right
        } else {
            self.x_left + j as f64 * self.h
        }
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.n_elements).map(|j| self.edge(j)).collect()
    }

    /// Background element containing `x`, clamped to the mesh.
    pub fn locate(&self, x: f64) -> usize {
        let j = ((x - self.x_left) / self.h).floor();
        (j.max(0.0) as usize).min(self.n_elements - 1)
    }
}

pub fn build_background_mesh(x_left: f64, x_right: f64, n: usize) -> Result<BackgroundMesh> {
    if n < 4 {
        return Err(CutDgError::InvalidMesh(format!("need at least 4 elements, got {n}")));
    }
    if !(x_left < x_right) || !x_left.is_finite() || !x_right.is_finite() {
        return Err(CutDgError::InvalidMesh(format!("degenerate domain [{x_left}, {x_right}]")));
    }
    Ok(BackgroundMesh { x_left, x_right, n_elements: n, h: (x_right - x_left) / n as f64 })
}

/// An interface inside background element `element`, at offset `alpha * h`
/// from the element's left edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub element: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceSet {
    pub cuts: Vec<Cut>,
    pub seed: u64,
    /// Size fraction of the unfitted boundary cells, when the physical domain
    /// is immersed in the background mesh.
    pub boundary_alpha: Option<f64>,
}

impl InterfaceSet {
    pub fn empty() -> Self {
        Self { cuts: Vec::new(), seed: 0, boundary_alpha: None }
    }

    pub fn positions(&self, mesh: &BackgroundMesh) -> Vec<f64> {
        self.cuts.iter().map(|c| mesh.edge(c.element) + c.alpha * mesh.h).collect()
    }

    /// Interfaces at prescribed coordinates.
    pub fn at_positions(mesh: &BackgroundMesh, xs: &[f64]) -> Result<Self> {
        let mut cuts = Vec::with_capacity(xs.len());
        for &x in xs {
            let element = mesh.locate(x);
            let alpha = (x - mesh.edge(element)) / mesh.h;
            if !(alpha > 0.0 && alpha < 1.0) || x <= mesh.x_left || x >= mesh.x_right {
                return Err(CutDgError::InvalidMesh(format!(
                    "interface at {x} is not interior to a background element"
                )));
            }
            cuts.push(Cut { element, alpha: guard_fraction(alpha) });
        }
        let set = Self { cuts, seed: 0, boundary_alpha: None };
        set.validate(mesh)?;
        Ok(set)
    }

    fn validate(&self, mesh: &BackgroundMesh) -> Result<()> {
        for w in self.cuts.windows(2) {
            if w[1].element <= w[0].element {
                return Err(CutDgError::InvalidMesh("interfaces must lie in distinct, increasing elements".into()));
            }
        }
        if let Some(last) = self.cuts.last() {
            if last.element >= mesh.n_elements {
                return Err(CutDgError::InvalidMesh("interface outside the mesh".into()));
            }
        }
        if self.boundary_alpha.is_some() && self.cuts.iter().any(|c| c.element == 0 || c.element == mesh.n_elements - 1)
        {
            return Err(CutDgError::InvalidMesh("an unfitted boundary cell cannot also carry an interface".into()));
        }
        Ok(())
    }
}

fn guard_fraction(alpha: f64) -> f64 {
    if alpha < MIN_CUT_FRACTION {
        log::warn!("cut fraction {alpha:e} clamped to {MIN_CUT_FRACTION:e}");
        MIN_CUT_FRACTION
    } else if 1.0 - alpha < MIN_CUT_FRACTION {
        log::warn!("cut fraction {alpha} clamped to 1 - {MIN_CUT_FRACTION:e}");
        1.0 - MIN_CUT_FRACTION
    } else {
        alpha
    }
}

/// Places one interface in every background element whose left edge lies in
/// `[region.0, region.1)`, at offset `alpha_k h` with `alpha_k = s * alpha_cap`
/// and `s` uniform on `[1e-6, 1]`.
pub fn generate_interfaces(
    mesh: &BackgroundMesh,
    cut_region: (f64, f64),
    alpha_cap: f64,
    seed: u64,
) -> Result<InterfaceSet> {
    if !(alpha_cap > 0.0 && alpha_cap < 1.0) {
        return Err(CutDgError::InvalidParameter(format!("alpha cap must lie in (0, 1), got {alpha_cap}")));
    }
    let (a, b) = cut_region;
    if a < mesh.x_left - 1e-12 * mesh.h || b > mesh.x_right + 1e-12 * mesh.h {
        return Err(CutDgError::InvalidParameter(format!("cut region [{a}, {b}] leaves the domain")));
    }
    let tol = 1e-9 * mesh.h;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cuts = Vec::new();
    for j in 0..mesh.n_elements {
        let x = mesh.edge(j);
        if x >= a - tol && x < b - tol {
            let s: f64 = rng.random_range(MIN_CUT_SCALE..=1.0);
            cuts.push(Cut { element: j, alpha: guard_fraction(s * alpha_cap) });
        }
    }
    Ok(InterfaceSet { cuts, seed, boundary_alpha: None })
}

/// Background mesh for a physical domain `[x_l, x_r]` whose end cells are cut
/// to size `alpha h`. The `n` background elements cover
/// `[x_l - (1 - alpha) h, x_r + (1 - alpha) h]`.
pub fn build_unfitted_boundary_mesh(
    x_l: f64,
    x_r: f64,
    n: usize,
    alpha: f64,
) -> Result<(BackgroundMesh, InterfaceSet)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(CutDgError::InvalidParameter(format!("boundary cut fraction must lie in (0, 1], got {alpha}")));
    }
    if alpha == 1.0 {
        return Ok((build_background_mesh(x_l, x_r, n)?, InterfaceSet::empty()));
    }
    if n < 4 {
        return Err(CutDgError::InvalidMesh(format!("need at least 4 elements, got {n}")));
    }
    let alpha = guard_fraction(alpha);
    let h = (x_r - x_l) / (n as f64 - 2.0 + 2.0 * alpha);
    let mut mesh = build_background_mesh(x_l - (1.0 - alpha) * h, x_r + (1.0 - alpha) * h, n)?;
    mesh.h = h;
    Ok((mesh, InterfaceSet { cuts: Vec::new(), seed: 0, boundary_alpha: Some(alpha) }))
}

/// Active mesh of one subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveMesh {
    pub subdomain: usize,
    /// Background element indices, increasing.
    pub cells: Vec<usize>,
    /// Physical intersections `I_j ∩ Ω_i`.
    pub intersections: Vec<(f64, f64)>,
    /// Intersection lengths, computed from the cut fractions rather than by
    /// subtracting coordinates.
    pub lengths: Vec<f64>,
    pub cut: Vec<bool>,
    /// Global index of the first element in the flattened element list.
    pub offset: usize,
}

impl ActiveMesh {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

pub fn build_active_meshes(mesh: &BackgroundMesh, ifaces: &InterfaceSet) -> Result<Vec<ActiveMesh>> {
    ifaces.validate(mesh)?;
    let h = mesh.h;
    let n = mesh.n_elements;
    let mut meshes = vec![new_active(0, 0)];
    let mut next_cut = ifaces.cuts.iter().peekable();
    let mut count = 0usize;

    for j in 0..n {
        // physical part of the cell
        let (mut start, mut start_frac) = (mesh.edge(j), 0.0);
        let (mut end, mut end_frac) = (mesh.edge(j + 1), 1.0);
        let mut boundary_cut = false;
        if let Some(a) = ifaces.boundary_alpha {
            if j == 0 {
                start = mesh.x_left + (1.0 - a) * h;
                start_frac = 1.0 - a;
                boundary_cut = true;
            }
            if j == n - 1 {
                end = mesh.x_right - (1.0 - a) * h;
                end_frac = a;
                boundary_cut = true;
            }
        }
        match next_cut.peek() {
            Some(c) if c.element == j => {
                let x = mesh.edge(j) + c.alpha * h;
                let alpha = c.alpha;
                next_cut.next();
                let cur = meshes.last_mut().unwrap();
                push_piece(cur, j, (start, x), (alpha - start_frac) * h, true);
                count += 1;
                let sub = meshes.len();
                meshes.push(new_active(sub, count));
                let cur = meshes.last_mut().unwrap();
                push_piece(cur, j, (x, end), (end_frac - alpha) * h, true);
                count += 1;
            }
            _ => {
                let cur = meshes.last_mut().unwrap();
                push_piece(cur, j, (start, end), (end_frac - start_frac) * h, boundary_cut);
                count += 1;
            }
        }
    }
    Ok(meshes)
}

fn new_active(subdomain: usize, offset: usize) -> ActiveMesh {
    ActiveMesh { subdomain, cells: Vec::new(), intersections: Vec::new(), lengths: Vec::new(), cut: Vec::new(), offset }
}

fn push_piece(m: &mut ActiveMesh, cell: usize, iv: (f64, f64), len: f64, cut: bool) {
    m.cells.push(cell);
    m.intersections.push(iv);
    m.lengths.push(len);
    m.cut.push(cut);
}

/// A large-intersection element together with the adjacent small ones
/// attached to it.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroElement {
    pub subdomain: usize,
    /// Global index of the large (owner) element.
    pub owner: usize,
    /// Global indices of the members, contiguous and increasing.
    pub members: Range<usize>,
    /// Physical extent `I_M`.
    pub left: f64,
    pub right: f64,
    pub length: f64,
    /// `|K_j| / |I_M|` per member, in member order.
    pub weights: Vec<f64>,
}

impl MacroElement {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Stabilized interior edges, as pairs of adjacent member indices.
    pub fn stabilized_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.members.clone().zip(self.members.clone().skip(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroElementPartition {
    pub subdomain: usize,
    pub macros: Vec<MacroElement>,
}

/// Attaches every small element of `active` (`|K| / h < delta`) to an
/// adjacent large element of the same subdomain, preferring the left one.
pub fn partition_macro_elements(active: &ActiveMesh, h: f64, delta: f64) -> Result<MacroElementPartition> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(CutDgError::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")));
    }
    let n = active.len();
    let large: Vec<bool> = active.lengths.iter().map(|l| l / h >= delta).collect();
    if !large.iter().any(|&b| b) {
        return Err(CutDgError::NoLargeElement { subdomain: active.subdomain, delta });
    }
    // owner[k] = local index of the large element that k is attached to
    let mut owner = vec![usize::MAX; n];
    for k in 0..n {
        if large[k] {
            owner[k] = k;
        } else if k > 0 && large[k - 1] {
            owner[k] = k - 1;
        } else if k + 1 < n && large[k + 1] {
            owner[k] = k + 1;
        } else {
            return Err(CutDgError::NoLargeElement { subdomain: active.subdomain, delta });
        }
    }
    let mut macros = Vec::new();
    let mut k = 0;
    while k < n {
        let o = owner[k];
        let mut end = k + 1;
        while end < n && owner[end] == o {
            end += 1;
        }
        let length: f64 = active.lengths[k..end].iter().sum();
        macros.push(MacroElement {
            subdomain: active.subdomain,
            owner: active.offset + o,
            members: active.offset + k..active.offset + end,
            left: active.intersections[k].0,
            right: active.intersections[end - 1].1,
            length,
            weights: active.lengths[k..end].iter().map(|l| l / length).collect(),
        });
        k = end;
    }
    Ok(MacroElementPartition { subdomain: active.subdomain, macros })
}

/// One active element in the flattened, spatially ordered element list.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveElement {
    pub subdomain: usize,
    pub cell: usize,
    pub left: f64,
    pub right: f64,
    pub length: f64,
    pub cut: bool,
}

/// The complete cut geometry: built once per run, immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshComplex {
    pub background: BackgroundMesh,
    pub interfaces: InterfaceSet,
    pub delta: f64,
    pub active: Vec<ActiveMesh>,
    pub partitions: Vec<MacroElementPartition>,
    /// All active elements of all subdomains in spatial order.
    pub elements: Vec<ActiveElement>,
    /// All macro-elements in spatial order.
    pub macros: Vec<MacroElement>,
    /// Macro-element index of every active element.
    pub element_macro: Vec<usize>,
}

impl MeshComplex {
    pub fn build(background: BackgroundMesh, interfaces: InterfaceSet, delta: f64) -> Result<Self> {
        let active = build_active_meshes(&background, &interfaces)?;
        let partitions =
            active.iter().map(|a| partition_macro_elements(a, background.h, delta)).collect::<Result<Vec<_>>>()?;
        let mut elements = Vec::new();
        for a in &active {
            for k in 0..a.len() {
                elements.push(ActiveElement {
                    subdomain: a.subdomain,
                    cell: a.cells[k],
                    left: a.intersections[k].0,
                    right: a.intersections[k].1,
                    length: a.lengths[k],
                    cut: a.cut[k],
                });
            }
        }
        let macros: Vec<MacroElement> = partitions.iter().flat_map(|p| p.macros.iter().cloned()).collect();
        let mut element_macro = vec![0; elements.len()];
        for (m, mac) in macros.iter().enumerate() {
            for a in mac.members.clone() {
                element_macro[a] = m;
            }
        }
        Ok(Self { background, interfaces, delta, active, partitions, elements, macros, element_macro })
    }

    pub fn h(&self) -> f64 {
        self.background.h
    }

    pub fn n_subdomains(&self) -> usize {
        self.active.len()
    }

    /// Physical domain (excludes the padding of unfitted boundaries).
    pub fn physical_domain(&self) -> (f64, f64) {
        (self.elements[0].left, self.elements.last().unwrap().right)
    }

    pub fn physical_length(&self) -> f64 {
        self.elements.iter().map(|e| e.length).sum()
    }

    /// Active element whose intersection contains `x` (the left one at a shared end point).
    pub fn element_at(&self, x: f64) -> usize {
        match self.elements.binary_search_by(|e| e.right.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i,
            Err(i) => i.min(self.elements.len() - 1),
        }
    }

    pub fn min_macro_length(&self) -> f64 {
        self.macros.iter().map(|m| m.length).fold(f64::INFINITY, f64::min)
    }

    pub fn max_cut_fraction(&self) -> f64 {
        self.interfaces.cuts.iter().map(|c| c.alpha).fold(0.0, f64::max)
    }

    /// Faces between consecutive elements that are subdomain interfaces.
    pub fn is_interface_face(&self, left_element: usize) -> bool {
        self.elements[left_element].subdomain != self.elements[left_element + 1].subdomain
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn background_mesh_spacing() {
        let m = build_background_mesh(0.0, 2.0, 20).unwrap();
        assert!((m.h - 0.1).abs() < 1e-15);
        let e = m.edges();
        assert_eq!(e.len(), 21);
        assert_eq!(e[20], 2.0);
        for (j, x) in e.iter().enumerate() {
            assert!((x - 0.1 * j as f64).abs() < 1e-14);
        }
        assert_eq!(build_background_mesh(0.0, 1.0, 4).unwrap().h, 0.25);
        assert!((build_background_mesh(-2.0, 2.0, 200).unwrap().h - 0.02).abs() < 1e-16);
    }

    #[test]
    fn background_mesh_rejects_bad_input() {
        assert!(build_background_mesh(0.0, 1.0, 3).is_err());
        assert!(build_background_mesh(1.0, 1.0, 10).is_err());
    }

    #[test]
    fn interfaces_in_middle_quarter() {
        let m = build_background_mesh(0.0, 2.0, 20).unwrap();
        let set = generate_interfaces(&m, (0.75, 1.25), 0.1, 7).unwrap();
        let cells: Vec<usize> = set.cuts.iter().map(|c| c.element).collect();
        assert_eq!(cells, vec![8, 9, 10, 11, 12]);
        for c in &set.cuts {
            assert!(c.alpha >= 1e-7 && c.alpha <= 0.1);
        }
        assert_eq!(set, generate_interfaces(&m, (0.75, 1.25), 0.1, 7).unwrap());
        assert!(generate_interfaces(&m, (1.0, 1.0), 0.1, 7).unwrap().cuts.is_empty());
    }

    #[test]
    fn cut_count_is_quarter_of_n() {
        for n in [20, 40, 80, 160, 320, 640] {
            let m = build_background_mesh(0.0, 2.0, n).unwrap();
            assert_eq!(generate_interfaces(&m, (0.75, 1.25), 0.1, 1).unwrap().cuts.len(), n / 4);
        }
    }

    #[test]
    fn unfitted_boundary_geometry() {
        let (m, set) = build_unfitted_boundary_mesh(0.0, 1.0, 100, 0.5).unwrap();
        assert!((m.x_left + 0.5 * m.h).abs() < 1e-15);
        let mc = MeshComplex::build(m.clone(), set, 0.2).unwrap();
        let (l, r) = mc.physical_domain();
        assert!(l.abs() < 1e-14 && (r - 1.0).abs() < 1e-14);
        assert!((mc.elements[0].length - 0.5 * m.h).abs() < 1e-15);

        let (m, set) = build_unfitted_boundary_mesh(0.0, 1.0, 50, 0.01).unwrap();
        let mc = MeshComplex::build(m.clone(), set, 0.2).unwrap();
        assert!((mc.elements[0].length - 0.01 * m.h).abs() < 1e-16);
        assert!((mc.elements[49].length - 0.01 * m.h).abs() < 1e-16);
        assert!((mc.physical_length() - 1.0).abs() < 1e-13);
        // the boundary cells merge inward
        assert_eq!(mc.macros[0].members, 0..2);
        assert_eq!(mc.macros.last().unwrap().members, 48..50);

        let (m, set) = build_unfitted_boundary_mesh(0.0, 1.0, 10, 1.0).unwrap();
        assert_eq!((m.x_left, m.x_right), (0.0, 1.0));
        assert!(set.boundary_alpha.is_none());
    }

    #[test]
    fn single_cut_splits_element() {
        let m = build_background_mesh(0.0, 1.0, 10).unwrap();
        let set = InterfaceSet { cuts: vec![Cut { element: 4, alpha: 0.3 }], seed: 0, boundary_alpha: None };
        let a = build_active_meshes(&m, &set).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(*a[0].cells.last().unwrap(), 4);
        assert_eq!(a[1].cells[0], 4);
        assert!((a[0].lengths.last().unwrap() - 0.3 * m.h).abs() < 1e-16);
        assert!((a[1].lengths[0] - 0.7 * m.h).abs() < 1e-16);

        let a = build_active_meshes(&m, &InterfaceSet::empty()).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].len(), 10);
        assert!(a[0].cut.iter().all(|c| !c));
    }

    #[test]
    fn tiling_for_many_seeds() {
        let m = build_background_mesh(0.0, 2.0, 20).unwrap();
        for seed in 0..1000 {
            let set = generate_interfaces(&m, (0.75, 1.25), 0.1, seed).unwrap();
            let mc = MeshComplex::build(m.clone(), set, 0.2).unwrap();
            assert_eq!(mc.n_subdomains(), 6);
            assert!((mc.physical_length() - 2.0).abs() <= 2.0 * 1e-13);
            for mac in &mc.macros {
                assert!(mac.length >= 0.2 * m.h);
                assert!(mac.len() <= 3);
                assert!((mac.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                let owner = &mc.elements[mac.owner];
                assert!(owner.length / m.h >= 0.2);
            }
            let mut seen = vec![0; mc.elements.len()];
            for mac in &mc.macros {
                for a in mac.members.clone() {
                    seen[a] += 1;
                    assert_eq!(mc.elements[a].subdomain, mac.subdomain);
                }
            }
            assert!(seen.iter().all(|&s| s == 1));
        }
    }

    #[test]
    fn small_piece_merges_left() {
        let m = build_background_mesh(0.0, 1.0, 10).unwrap();
        let set = InterfaceSet { cuts: vec![Cut { element: 5, alpha: 0.0037 }], seed: 0, boundary_alpha: None };
        let mc = MeshComplex::build(m.clone(), set, 0.2).unwrap();
        let left = &mc.partitions[0].macros;
        let last = left.last().unwrap();
        assert_eq!(last.members, 4..6);
        assert_eq!(last.owner, 4);
        // brute force weights from the geometry
        let k1 = mc.elements[4].right - mc.elements[4].left;
        let k2 = mc.elements[5].right - mc.elements[5].left;
        assert!((last.weights[0] - k1 / (k1 + k2)).abs() < 1e-12);
        assert!((last.weights[1] - k2 / (k1 + k2)).abs() < 1e-12);
        assert!((last.weights[0] - 1.0 / 1.0037).abs() < 1e-14);
        // the large right piece is a singleton
        assert_eq!(mc.partitions[1].macros[0].members, 6..7);
    }

    #[test]
    fn half_cut_gives_two_singletons() {
        let m = build_background_mesh(0.0, 1.0, 10).unwrap();
        let set = InterfaceSet { cuts: vec![Cut { element: 5, alpha: 0.5 }], seed: 0, boundary_alpha: None };
        let mc = MeshComplex::build(m, set, 0.2).unwrap();
        assert!(mc.macros.iter().all(|m| m.len() == 1));
        assert!(mc.macros.iter().all(|m| m.stabilized_edges().count() == 0));
    }

    #[test]
    fn missing_large_element_is_an_error() {
        let m = build_background_mesh(0.0, 1.0, 10).unwrap();
        // subdomain between the two cuts holds 0.5h + 0.5h, both small for delta 0.6
        let set = InterfaceSet {
            cuts: vec![Cut { element: 4, alpha: 0.5 }, Cut { element: 5, alpha: 0.5 }],
            seed: 0,
            boundary_alpha: None,
        };
        assert!(matches!(MeshComplex::build(m, set, 0.6), Err(CutDgError::NoLargeElement { subdomain: 1, .. })));
    }

    #[test]
    fn three_member_macro() {
        // a subdomain whose only full element is flanked by two small pieces
        let m = build_background_mesh(0.0, 1.0, 10).unwrap();
        let set = InterfaceSet {
            cuts: vec![Cut { element: 3, alpha: 0.95 }, Cut { element: 5, alpha: 0.05 }],
            seed: 0,
            boundary_alpha: None,
        };
        let mc = MeshComplex::build(m, set, 0.2).unwrap();
        let mid = &mc.partitions[1].macros;
        assert_eq!(mid.len(), 1);
        assert_eq!(mid[0].len(), 3);
        assert_eq!(mid[0].stabilized_edges().count(), 2);
    }

    #[test]
    fn element_lookup() {
        let m = build_background_mesh(0.0, 1.0, 10).unwrap();
        let set = InterfaceSet { cuts: vec![Cut { element: 5, alpha: 0.5 }], seed: 0, boundary_alpha: None };
        let mc = MeshComplex::build(m, set, 0.2).unwrap();
        assert_eq!(mc.element_at(0.0), 0);
        assert_eq!(mc.element_at(0.52), 5);
        assert_eq!(mc.element_at(0.57), 6);
        assert_eq!(mc.element_at(1.0), 10);
    }
}
