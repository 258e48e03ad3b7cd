use std::collections::HashMap;

use crate::dataset::Rating;
use crate::error::{Error, Result};

pub const MIN_RATING: f64 = 0.5;
pub const MAX_RATING: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    /// Dense item index.
    pub item: usize,
    pub rating: f64,
    pub timestamp: i64,
}

/// Sparse user x item ratings over a fixed, sorted item universe.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    users: Vec<u64>,
    items: Vec<u64>,
    user_index: HashMap<u64, usize>,
    item_index: HashMap<u64, usize>,
    /// Per user, entries sorted by item index.
    rows: Vec<Vec<Entry>>,
}

impl InteractionMatrix {
    /// Items without ratings may appear in `item_universe` (cold items).
    pub fn new(ratings: &[Rating], item_universe: &[u64]) -> Result<Self> {
        let mut items = item_universe.to_vec();
        items.sort_unstable();
        items.dedup();
        let item_index: HashMap<u64, usize> = items.iter().enumerate().map(|(i, &m)| (m, i)).collect();

        let mut users: Vec<u64> = ratings.iter().map(|r| r.user).collect();
        users.sort_unstable();
        users.dedup();
        let user_index: HashMap<u64, usize> = users.iter().enumerate().map(|(i, &u)| (u, i)).collect();

        let mut rows = vec![Vec::new(); users.len()];
        for r in ratings {
            if !(MIN_RATING..=MAX_RATING).contains(&r.rating) {
                return Err(Error::Parameter(format!(
                    "rating {} of user {} on item {} outside [{MIN_RATING}, {MAX_RATING}]",
                    r.rating, r.user, r.item
                )));
            }
            let item = *item_index
                .get(&r.item)
                .ok_or_else(|| Error::Alignment(format!("rated item {} not in the catalog", r.item)))?;
            rows[user_index[&r.user]].push(Entry {
                item,
                rating: r.rating,
                timestamp: r.timestamp,
            });
        }
        for (u, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|e| e.item);
            if let Some(w) = row.windows(2).find(|w| w[0].item == w[1].item) {
                return Err(Error::Duplicate(format!(
                    "user {} rated item {} twice",
                    users[u], items[w[0].item]
                )));
            }
        }
        Ok(Self {
            users,
            items,
            user_index,
            item_index,
            rows,
        })
    }

    /// Item universe is the set of rated items.
    pub fn from_ratings(ratings: &[Rating]) -> Result<Self> {
        let items: Vec<u64> = ratings.iter().map(|r| r.item).collect();
        Self::new(ratings, &items)
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn users(&self) -> &[u64] {
        &self.users
    }

    pub fn items(&self) -> &[u64] {
        &self.items
    }

    pub fn user_index(&self, user: u64) -> Option<usize> {
        self.user_index.get(&user).copied()
    }

    pub fn item_index(&self, item: u64) -> Option<usize> {
        self.item_index.get(&item).copied()
    }

    /// Entries of a dense user index.
    pub fn row(&self, user: usize) -> &[Entry] {
        &self.rows[user]
    }

    pub fn user_row(&self, user: u64) -> Result<&[Entry]> {
        self.user_index(user)
            .map(|u| self.rows[u].as_slice())
            .ok_or(Error::MissingUser(user))
    }

    pub fn has_rated(&self, user: usize, item: usize) -> bool {
        self.rows[user].binary_search_by_key(&item, |e| e.item).is_ok()
    }

    /// Ratings back in external ids, ordered by user then item.
    pub fn to_ratings(&self) -> Vec<Rating> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, row)| {
                row.iter().map(move |e| Rating {
                    user: self.users[u],
                    item: self.items[e.item],
                    rating: e.rating,
                    timestamp: e.timestamp,
                })
            })
            .collect()
    }

    /// Number of items each item index was rated by.
    pub fn item_popularity(&self) -> Vec<usize> {
        let mut pop = vec![0; self.items.len()];
        for e in self.rows.iter().flatten() {
            pop[e.item] += 1;
        }
        pop
    }
}
