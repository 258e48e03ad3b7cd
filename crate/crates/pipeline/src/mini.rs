//! Generator for the bundled mini-dataset: eight procedural Y4M trailers,
//! 50 users, genres, tags and 1024-dim pseudo embeddings per keyframe.
//!
//! The committed copy under `data/mini` must equal [`files`] byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use visrec_core::media::{write_y4m, Chroma, FrameBuffer};

pub const WIDTH: usize = 48;
pub const HEIGHT: usize = 32;
pub const FPS: u32 = 12;
pub const USERS: u64 = 50;
const EMBEDDING_DIM: usize = 1024;

struct MovieSpec {
    id: u64,
    title: &'static str,
    genres: &'static str,
    /// 0 = saturated, busy trailers; 1 = pale, slow ones.
    style: usize,
    palette: [[u8; 3]; 3],
    tags: &'static [&'static str],
}

const MOVIES: [MovieSpec; 8] = [
    MovieSpec {
        id: 1,
        title: "Crimson Harbor (2011)",
        genres: "Action|Thriller",
        style: 0,
        palette: [[220, 30, 30], [30, 40, 200], [240, 200, 20]],
        tags: &["explosions", "car chase", "heist"],
    },
    MovieSpec {
        id: 2,
        title: "The Quiet Orchard (2014)",
        genres: "Drama|Romance",
        style: 1,
        palette: [[200, 220, 180], [230, 200, 210], [190, 200, 230]],
        tags: &["slow burn", "countryside", "letters"],
    },
    MovieSpec {
        id: 3,
        title: "Neon Circuit (2019)",
        genres: "Sci-Fi|Action",
        style: 0,
        palette: [[240, 20, 200], [20, 230, 230], [120, 20, 240]],
        tags: &["cyberpunk", "explosions", "hackers"],
    },
    MovieSpec {
        id: 4,
        title: "Paper Lanterns (2008)",
        genres: "Animation|Children|Fantasy",
        style: 1,
        palette: [[250, 220, 170], [200, 235, 235], [235, 210, 240]],
        tags: &["hand drawn", "festival", "family"],
    },
    MovieSpec {
        id: 5,
        title: "Dust and Thunder (1999)",
        genres: "Western|Adventure",
        style: 0,
        palette: [[200, 100, 20], [20, 120, 40], [230, 40, 60]],
        tags: &["desert", "duel", "horses"],
    },
    MovieSpec {
        id: 6,
        title: "Glass Corridor (2016)",
        genres: "Horror|Mystery",
        style: 0,
        palette: [[20, 160, 60], [160, 20, 20], [40, 40, 180]],
        tags: &["haunted", "twist ending", "heist"],
    },
    MovieSpec {
        id: 7,
        title: "Saturday Brunch (2012)",
        genres: "Comedy",
        style: 1,
        palette: [[240, 230, 190], [210, 235, 200], [240, 205, 190]],
        tags: &["family", "friendship", "letters"],
    },
    MovieSpec {
        id: 8,
        title: "Tidal Memory (2005)",
        genres: "Documentary",
        style: 1,
        palette: [[180, 210, 230], [215, 230, 200], [225, 215, 235]],
        tags: &["ocean", "countryside", "slow burn"],
    },
];

/// Frames per shot of a movie.
pub fn shot_lengths(movie: u64) -> [usize; 3] {
    [6 + (movie % 3) as usize, 8, 7 + (movie % 2) as usize]
}

/// Last frame index of every shot but the final one.
pub fn boundaries(movie: u64) -> Vec<usize> {
    let lens = shot_lengths(movie);
    vec![lens[0] - 1, lens[0] + lens[1] - 1]
}

pub fn keyframes(movie: u64) -> Vec<usize> {
    let mut start = 0;
    shot_lengths(movie)
        .iter()
        .map(|&len| {
            let k = (2 * start + len - 1) / 2;
            start += len;
            k
        })
        .collect()
}

pub fn movie_ids() -> Vec<u64> {
    MOVIES.iter().map(|m| m.id).collect()
}

fn shot_frame(spec: &MovieSpec, color: [u8; 3], t: usize) -> FrameBuffer {
    let (period, dark, speed) = if spec.style == 0 { (6, 0.45, 2) } else { (16, 0.85, 0) };
    FrameBuffer::from_fn(WIDTH, HEIGHT, |x, y| {
        let phase = (x + speed * t + if spec.style == 0 { y / 4 * 2 } else { 0 }) % period;
        let shade = if phase < period / 2 { 1.0 } else { dark };
        color.map(|c| (c as f64 * shade).round() as u8)
    })
    .expect("fixed frame size")
}

fn video(spec: &MovieSpec) -> Vec<u8> {
    let frames: Vec<FrameBuffer> = shot_lengths(spec.id)
        .iter()
        .zip(spec.palette)
        .flat_map(|(&len, color)| (0..len).map(move |t| shot_frame(spec, color, t)))
        .collect();
    write_y4m(&frames, FPS, Chroma::C420).expect("valid frames")
}

fn movies_csv() -> String {
    let mut s = String::from("movieId,title,genres\n");
    for m in &MOVIES {
        writeln!(s, "{},\"{}\",{}", m.id, m.title, m.genres).unwrap();
    }
    s
}

fn ratings_csv() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut s = String::from("userId,movieId,rating,timestamp\n");
    let mut clock = 1_400_000_000i64;
    for user in 1..=USERS {
        // a third prefer each style, a third are indifferent
        let taste = (user % 3) as usize;
        let count = rng.random_range(5..=6);
        let mut ids = movie_ids();
        rand::seq::SliceRandom::shuffle(ids.as_mut_slice(), &mut rng);
        ids.truncate(count);
        ids.sort_unstable();
        for id in ids {
            let style = MOVIES[id as usize - 1].style;
            let base = match taste {
                2 => 3.5,
                t if t == style => 4.5,
                _ => 2.0,
            };
            let noisy: f64 = base + rng.random_range(-0.75..0.75);
            let rating = ((noisy * 2.0).round() / 2.0).clamp(0.5, 5.0);
            clock += rng.random_range(60..86_400);
            writeln!(s, "{user},{id},{rating:.1},{clock}").unwrap();
        }
    }
    s
}

fn tags_csv() -> String {
    let mut s = String::from("userId,movieId,tag,timestamp\n");
    let mut clock = 1_450_000_000i64;
    for m in &MOVIES {
        for (j, tag) in m.tags.iter().enumerate() {
            for k in 0..=(j as u64 % 2) {
                let user = (m.id * 7 + j as u64 * 3 + k * 11) % USERS + 1;
                clock += 3_600;
                writeln!(s, "{user},{},{tag},{clock}", m.id).unwrap();
            }
        }
    }
    s
}

/// Activations driven by the movie style and shot color, plus noise.
fn embeddings_csv() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let latent_dim = 6;
    let basis: Vec<f64> = (0..latent_dim * EMBEDDING_DIM).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut s = String::from("movie_id,keyframe_index,kind");
    for i in 0..EMBEDDING_DIM {
        write!(s, ",v{i}").unwrap();
    }
    s.push('\n');
    for m in &MOVIES {
        for (shot, k) in keyframes(m.id).into_iter().enumerate() {
            let c = m.palette[shot];
            let z = [
                (m.style == 0) as u8 as f64,
                (m.style == 1) as u8 as f64,
                c[0] as f64 / 255.0,
                c[1] as f64 / 255.0,
                c[2] as f64 / 255.0,
                1.0,
            ];
            write!(s, "{},{k},DNN", m.id).unwrap();
            for d in 0..EMBEDDING_DIM {
                let act: f64 = (0..latent_dim).map(|l| z[l] * basis[l * EMBEDDING_DIM + d]).sum::<f64>()
                    + rng.random_range(-0.05..0.05);
                // rectified, like a post-ReLU layer
                write!(s, ",{:.6}", act.max(0.0)).unwrap();
            }
            s.push('\n');
        }
    }
    s
}

const CONFIG: &str = r#"# Bundled mini-dataset. Paths are relative to this file.
seed = 42

[paths]
videos = "videos"
ratings = "ratings.csv"
tags = "tags.csv"
movies = "movies.csv"
embeddings = "embeddings.csv"
cache = "cache"

[fuse]
k = 4

[textfeat]
lsa_rank = 5

[train]
epochs = 30

[evaluate]
folds = 5

[recommend]
user = 1
n = 5
family = "FUSED"
"#;

/// Every file of the dataset as `(relative path, contents)`.
pub fn files() -> Vec<(String, Vec<u8>)> {
    let mut out = vec![
        ("visrec.toml".to_string(), CONFIG.as_bytes().to_vec()),
        ("movies.csv".to_string(), movies_csv().into_bytes()),
        ("ratings.csv".to_string(), ratings_csv().into_bytes()),
        ("tags.csv".to_string(), tags_csv().into_bytes()),
        ("embeddings.csv".to_string(), embeddings_csv().into_bytes()),
    ];
    out.extend(MOVIES.iter().map(|m| (format!("videos/{}.y4m", m.id), video(m))));
    out
}

pub fn write_to(dir: &Path) -> std::io::Result<()> {
    for (rel, bytes) in files() {
        let path = dir.join(rel);
        std::fs::create_dir_all(path.parent().unwrap())?;
        std::fs::write(path, bytes)?;
    }
    Ok(())
}

/// Location of the committed copy.
pub fn bundled_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("mini")
}
