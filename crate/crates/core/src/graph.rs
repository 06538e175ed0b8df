//! Small directed-graph routines shared by the coalgebra, automaton and
//! algebra code.

/// Strongly connected components, sinks first (reverse topological order).
/// Members of each component are sorted.
pub fn tarjan_scc(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    // explicit call stack of (node, next child position)
    let mut calls: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        calls.push((start, 0));
        index[start] = next;
        low[start] = next;
        next += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("scc stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

/// Nodes reachable from `roots`.
pub fn reachable(succ: &[Vec<usize>], roots: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut stack: Vec<usize> = roots.into_iter().collect();
    for &r in &stack {
        seen[r] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in &succ[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// For an edge-labelled graph, marks the nodes from which some cycle whose
/// largest label is even can be reached.
pub fn even_cycle_reach(n: usize, edges: &[(usize, usize, u32)]) -> Vec<bool> {
    let mut labels: Vec<u32> = edges.iter().map(|e| e.2).filter(|p| p % 2 == 0).collect();
    labels.sort_unstable();
    labels.dedup();
    let mut good = vec![false; n];
    for p in labels {
        let mut succ = vec![Vec::new(); n];
        for &(a, b, m) in edges {
            if m <= p {
                succ[a].push(b);
            }
        }
        let comps = tarjan_scc(&succ);
        let mut comp_of = vec![0; n];
        for (i, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = i;
            }
        }
        for &(a, b, m) in edges {
            if m == p && comp_of[a] == comp_of[b] {
                good[a] = true;
            }
        }
    }
    let mut pred = vec![Vec::new(); n];
    for &(a, b, _) in edges {
        pred[b].push(a);
    }
    let seeds: Vec<usize> = (0..n).filter(|&v| good[v]).collect();
    reachable(&pred, seeds)
}

/// Does every cycle among the nodes reachable from `roots` have an even
/// maximum node priority?
pub fn all_cycles_even(succ: &[Vec<usize>], prio: &[u32], roots: &[usize]) -> bool {
    let live = reachable(succ, roots.iter().copied());
    let mut odd: Vec<u32> = (0..succ.len()).filter(|&v| live[v] && prio[v] % 2 == 1).map(|v| prio[v]).collect();
    odd.sort_unstable();
    odd.dedup();
    for p in odd {
        let sub: Vec<Vec<usize>> = (0..succ.len())
            .map(|v| {
                if live[v] && prio[v] <= p {
                    succ[v].iter().copied().filter(|&w| live[w] && prio[w] <= p).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        for comp in tarjan_scc(&sub) {
            let cyclic = comp.len() > 1 || sub[comp[0]].contains(&comp[0]);
            if cyclic && comp.iter().any(|&v| prio[v] == p) {
                return false;
            }
        }
    }
    true
}
