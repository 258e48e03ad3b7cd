use std::collections::BTreeSet;

use visrec::mini;
use visrec_core::embeddings::load_embeddings;
use visrec_core::media::parse_y4m;
use visrec_core::shotseg::{detect_shots, DEFAULT_THRESHOLD};

#[test]
fn committed_files_match_the_generator() {
    let dir = mini::bundled_dir();
    for (rel, bytes) in mini::files() {
        let on_disk = std::fs::read(dir.join(&rel)).unwrap_or_else(|e| panic!("{rel}: {e}"));
        assert!(on_disk == bytes, "{rel} differs from the generator; rerun `visrec generate-mini {}`", dir.display());
    }
}

#[test]
fn videos_segment_into_the_generated_shots() {
    for id in mini::movie_ids() {
        let bytes = std::fs::read(mini::bundled_dir().join(format!("videos/{id}.y4m"))).unwrap();
        let stream = parse_y4m(&bytes).unwrap();
        assert_eq!((stream.frames()[0].width(), stream.frames()[0].height()), (mini::WIDTH, mini::HEIGHT));
        let shots = detect_shots(&stream, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(shots.boundaries(), mini::boundaries(id).as_slice(), "movie {id}");
        assert_eq!(shots.keyframes(), mini::keyframes(id));
    }
}

#[test]
fn embeddings_cover_exactly_the_keyframes() {
    let keys: BTreeSet<(u64, u64)> = mini::movie_ids()
        .into_iter()
        .flat_map(|id| mini::keyframes(id).into_iter().map(move |k| (id, k as u64)))
        .collect();
    let table = load_embeddings(&mini::bundled_dir().join("embeddings.csv"), Some(&keys)).unwrap();
    assert_eq!(table.len(), keys.len());
}
