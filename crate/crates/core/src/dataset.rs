//! MovieLens-format readers: `ratings.csv`, `tags.csv`, `movies.csv`.

use std::io::Read;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: u64,
    pub item: u64,
    pub rating: f64,
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TagEvent {
    pub user: u64,
    pub item: u64,
    pub tag: String,
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Movie {
    pub id: u64,
    pub title: String,
    pub genres: Vec<String>,
}

fn field(row: &csv::StringRecord, i: usize, line: usize) -> Result<&str> {
    row.get(i)
        .map(str::trim)
        .ok_or_else(|| Error::Parameter(format!("line {line}: missing column {i}")))
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parameter(format!("line {line}: cannot parse {s:?}")))
}

pub fn read_ratings<R: Read>(input: R) -> Result<Vec<Rating>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        out.push(Rating {
            user: num(field(&row, 0, line)?, line)?,
            item: num(field(&row, 1, line)?, line)?,
            rating: num(field(&row, 2, line)?, line)?,
            timestamp: num(field(&row, 3, line)?, line)?,
        });
    }
    Ok(out)
}

pub fn read_tags<R: Read>(input: R) -> Result<Vec<TagEvent>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        out.push(TagEvent {
            user: num(field(&row, 0, line)?, line)?,
            item: num(field(&row, 1, line)?, line)?,
            tag: field(&row, 2, line)?.to_string(),
            timestamp: num(field(&row, 3, line)?, line)?,
        });
    }
    Ok(out)
}

pub fn read_movies<R: Read>(input: R) -> Result<Vec<Movie>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        out.push(Movie {
            id: num(field(&row, 0, line)?, line)?,
            title: field(&row, 1, line)?.to_string(),
            genres: field(&row, 2, line)?
                .split('|')
                .map(str::trim)
                .filter(|g| !g.is_empty())
                .map(String::from)
                .collect(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_movielens_rows() {
        let r = read_ratings("userId,movieId,rating,timestamp\n1,31,2.5,1260759144\n".as_bytes()).unwrap();
        assert_eq!(r[0], Rating { user: 1, item: 31, rating: 2.5, timestamp: 1260759144 });
        let t = read_tags("userId,movieId,tag,timestamp\n15,339,\"sandra 'boring' bullock\",1138537770\n".as_bytes())
            .unwrap();
        assert_eq!(t[0].tag, "sandra 'boring' bullock");
        let m = read_movies(
            "movieId,title,genres\n1,\"Toy Story (1995)\",Adventure|Animation|Children|Comedy|Fantasy\n".as_bytes(),
        )
        .unwrap();
        assert_eq!(m[0].genres.len(), 5);
        assert_eq!(m[0].title, "Toy Story (1995)");
    }

    #[test]
    fn bad_number_names_line() {
        let err = read_ratings("userId,movieId,rating,timestamp\n1,2,x,3\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
