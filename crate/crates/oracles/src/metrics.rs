//! Ranking metrics by materializing and walking every ranked list.

pub struct OracleUser {
    /// Score per catalog item.
    pub scores: Vec<f64>,
    /// Items the user rated anywhere (train, validation or test).
    pub known: Vec<bool>,
    /// Held-out relevant items.
    pub relevant: Vec<usize>,
}

fn sorted_desc(mut list: Vec<usize>, scores: &[f64]) -> Vec<usize> {
    // stable: earlier entries win ties
    list.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    list
}

/// (recall, precision, map) with one ranked list per held-out item: the item
/// placed after all unrated items so ties count against it.
pub fn protocol(users: &[OracleUser], n: usize) -> (f64, f64, f64) {
    let mut hits = 0.0;
    let mut rr = 0.0;
    let mut tests = 0.0;
    for u in users {
        for &t in &u.relevant {
            let mut list: Vec<usize> = (0..u.scores.len()).filter(|&i| !u.known[i]).collect();
            list.push(t);
            let list = sorted_desc(list, &u.scores);
            let pos = list.iter().position(|&i| i == t).unwrap() + 1;
            tests += 1.0;
            if pos <= n {
                hits += 1.0;
                rr += 1.0 / pos as f64;
            }
        }
    }
    let recall = hits / tests;
    (recall, recall / n as f64, rr / tests)
}

/// (recall, precision, map) averaged over users, one list per user over the
/// unrated items plus the held-out relevant items; relevant items lose ties,
/// and among themselves the smaller id goes first.
pub fn standard(users: &[OracleUser], n: usize) -> (f64, f64, f64) {
    let (mut recall, mut precision, mut map, mut count) = (0.0, 0.0, 0.0, 0.0);
    for u in users.iter().filter(|u| !u.relevant.is_empty()) {
        let mut rel = u.relevant.clone();
        rel.sort();
        let mut list: Vec<usize> = (0..u.scores.len()).filter(|&i| !u.known[i]).collect();
        list.extend(rel.iter().copied());
        let list = sorted_desc(list, &u.scores);
        let mut hits = 0.0;
        let mut ap = 0.0;
        for (pos, item) in list.iter().take(n).enumerate() {
            if rel.contains(item) {
                hits += 1.0;
                ap += hits / (pos + 1) as f64;
            }
        }
        recall += hits / rel.len() as f64;
        precision += hits / n as f64;
        map += ap / rel.len().min(n) as f64;
        count += 1.0;
    }
    (recall / count, precision / count, map / count)
}
