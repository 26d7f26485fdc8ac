use super::RootedBall;

/// All unordered rooted trees with `n` vertices, each as child lists.
pub fn all_rooted_trees(n: usize) -> Vec<RootedBall> {
    if n == 0 {
        return Vec::new();
    }
    // Level sequences in preorder: every vertex after the root has a
    // depth between 1 and one more than its predecessor's.
    fn rec(seq: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if seq.len() == n {
            out.push(seq.clone());
            return;
        }
        let last = *seq.last().unwrap();
        for d in 1..=last + 1 {
            seq.push(d);
            rec(seq, n, out);
            seq.pop();
        }
    }
    let mut seqs = Vec::new();
    rec(&mut vec![0], n, &mut seqs);
    seqs.into_iter()
        .map(|levels| {
            // preorder ids; relabel to breadth-first
            let mut parent = vec![usize::MAX; n];
            let mut stack: Vec<usize> = vec![0];
            for v in 1..n {
                while levels[*stack.last().unwrap()] >= levels[v] {
                    stack.pop();
                }
                parent[v] = *stack.last().unwrap();
                stack.push(v);
            }
            let mut bfs = vec![0usize];
            let mut i = 0;
            while i < bfs.len() {
                let u = bfs[i];
                bfs.extend((0..n).filter(|&w| parent[w] == u));
                i += 1;
            }
            let mut id = vec![0u32; n];
            for (new, &old) in bfs.iter().enumerate() {
                id[old] = new as u32;
            }
            let mut children = vec![Vec::new(); n];
            for w in 1..n {
                children[id[parent[w]] as usize].push(id[w]);
            }
            RootedBall::from_children(children)
        })
        .collect()
}

/// Isomorphism of two rooted trees by brute force over child matchings.
pub fn isomorphic(a: &RootedBall, b: &RootedBall) -> bool {
    a.len() == b.len() && iso_at(a, 0, b, 0)
}

fn iso_at(a: &RootedBall, u: usize, b: &RootedBall, v: usize) -> bool {
    let (ca, cb) = (a.children(u), b.children(v));
    if ca.len() != cb.len() {
        return false;
    }
    let mut idx: Vec<usize> = (0..cb.len()).collect();
    loop {
        if ca
            .iter()
            .zip(&idx)
            .all(|(&x, &j)| iso_at(a, x as usize, b, cb[j] as usize))
        {
            return true;
        }
        if !next_permutation(&mut idx) {
            return false;
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

