//! MovieLens-format ratings: parsing, density filtering and splitting.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: u32,
    pub movie: u32,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingsTable {
    pub ratings: Vec<Rating>,
    /// Genres of each movie, in file order.
    pub genres: BTreeMap<u32, Vec<String>>,
}

/// Ratings with users and movies renumbered `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseRatings {
    /// Original id of each dense user index, ascending.
    pub user_ids: Vec<u32>,
    pub movie_ids: Vec<u32>,
    pub entries: Vec<(usize, usize, f64)>,
}

impl RatingsTable {
    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    pub fn users(&self) -> BTreeSet<u32> {
        self.ratings.iter().map(|r| r.user).collect()
    }

    pub fn movies(&self) -> BTreeSet<u32> {
        self.ratings.iter().map(|r| r.movie).collect()
    }

    /// Dense indices over the users and movies of this table.
    pub fn dense(&self) -> DenseRatings {
        self.dense_over(&self.users(), &self.movies())
    }

    /// Dense indices over given id sets, so two tables can share them.
    /// Ratings of ids outside the sets are dropped.
    pub fn dense_over(&self, users: &BTreeSet<u32>, movies: &BTreeSet<u32>) -> DenseRatings {
        let user_ids: Vec<u32> = users.iter().copied().collect();
        let movie_ids: Vec<u32> = movies.iter().copied().collect();
        let uix: HashMap<u32, usize> = user_ids.iter().enumerate().map(|(i, u)| (*u, i)).collect();
        let mix: HashMap<u32, usize> = movie_ids.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let entries = self
            .ratings
            .iter()
            .filter_map(|r| Some((*uix.get(&r.user)?, *mix.get(&r.movie)?, r.value)))
            .collect();
        DenseRatings {
            user_ids,
            movie_ids,
            entries,
        }
    }
}

fn read_lossy(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    // movies.dat in the 1M release is Latin-1; titles are not used.
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses `UserID::MovieID::Rating::Timestamp` lines from a string.
pub fn parse_ratings(text: &str, path: &Path) -> Result<Vec<Rating>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split("::").collect();
        if fields.len() != 4 {
            return Err(parse_err(path, i + 1, format!("expected 4 fields, found {}", fields.len())));
        }
        let user: u32 = fields[0]
            .parse()
            .map_err(|_| parse_err(path, i + 1, format!("bad user id {:?}", fields[0])))?;
        let movie: u32 = fields[1]
            .parse()
            .map_err(|_| parse_err(path, i + 1, format!("bad movie id {:?}", fields[1])))?;
        let value: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(path, i + 1, format!("bad rating {:?}", fields[2])))?;
        if !(1.0..=5.0).contains(&value) {
            return Err(parse_err(path, i + 1, format!("rating {value} outside [1, 5]")));
        }
        fields[3]
            .parse::<i64>()
            .map_err(|_| parse_err(path, i + 1, format!("bad timestamp {:?}", fields[3])))?;
        if !seen.insert((user, movie)) {
            return Err(parse_err(path, i + 1, format!("duplicate rating of movie {movie} by user {user}")));
        }
        out.push(Rating { user, movie, value });
    }
    Ok(out)
}

/// Parses `MovieID::Title::Genre|Genre` lines from a string.
pub fn parse_movies(text: &str, path: &Path) -> Result<BTreeMap<u32, Vec<String>>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        // Split from both ends so a title containing "::" still parses.
        let (id, rest) = line
            .split_once("::")
            .ok_or_else(|| parse_err(path, i + 1, "expected MovieID::Title::Genres"))?;
        let (_, genres) = rest
            .rsplit_once("::")
            .ok_or_else(|| parse_err(path, i + 1, "expected MovieID::Title::Genres"))?;
        let id: u32 = id
            .parse()
            .map_err(|_| parse_err(path, i + 1, format!("bad movie id {id:?}")))?;
        let genres: Vec<String> = genres
            .split('|')
            .map(str::trim)
            .filter(|g| !g.is_empty())
            .map(String::from)
            .collect();
        if out.insert(id, genres).is_some() {
            return Err(parse_err(path, i + 1, format!("duplicate movie {id}")));
        }
    }
    Ok(out)
}

pub fn load_ratings(path: impl AsRef<Path>) -> Result<RatingsTable> {
    let path = path.as_ref();
    Ok(RatingsTable {
        ratings: parse_ratings(&read_lossy(path)?, path)?,
        genres: BTreeMap::new(),
    })
}

pub fn load_movies(path: impl AsRef<Path>) -> Result<BTreeMap<u32, Vec<String>>> {
    let path = path.as_ref();
    parse_movies(&read_lossy(path)?, path)
}

/// Drops users with fewer than `min_user` ratings, then movies with fewer
/// than `min_movie` ratings among the remaining users. One pass each.
pub fn filter_dense(table: &RatingsTable, min_user: usize, min_movie: usize) -> RatingsTable {
    let mut per_user: HashMap<u32, usize> = HashMap::new();
    for r in &table.ratings {
        *per_user.entry(r.user).or_default() += 1;
    }
    let kept: Vec<Rating> = table
        .ratings
        .iter()
        .filter(|r| per_user[&r.user] >= min_user)
        .copied()
        .collect();
    let mut per_movie: HashMap<u32, usize> = HashMap::new();
    for r in &kept {
        *per_movie.entry(r.movie).or_default() += 1;
    }
    let ratings: Vec<Rating> = kept.into_iter().filter(|r| per_movie[&r.movie] >= min_movie).collect();
    let movies: HashSet<u32> = ratings.iter().map(|r| r.movie).collect();
    let genres = table
        .genres
        .iter()
        .filter(|(m, _)| movies.contains(m))
        .map(|(m, g)| (*m, g.clone()))
        .collect();
    RatingsTable { ratings, genres }
}

/// Repeats the two passes until neither removes anything.
pub fn filter_dense_fixpoint(table: &RatingsTable, min_user: usize, min_movie: usize) -> RatingsTable {
    let mut current = filter_dense(table, min_user, min_movie);
    loop {
        let next = filter_dense(&current, min_user, min_movie);
        if next.len() == current.len() {
            return next;
        }
        current = next;
    }
}

/// Uniformly random partition with `round(fraction * len)` ratings in the
/// first part. Both parts keep the genre map.
pub fn split_ratings<R: Rng + ?Sized>(
    table: &RatingsTable,
    fraction: f64,
    rng: &mut R,
) -> Result<(RatingsTable, RatingsTable)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!("split fraction {fraction} not in (0, 1)")));
    }
    let mut idx: Vec<usize> = (0..table.len()).collect();
    idx.shuffle(rng);
    let cut = (fraction * table.len() as f64).round() as usize;
    let (a, b) = idx.split_at(cut);
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let pick = |ix: &[usize]| RatingsTable {
        ratings: ix.iter().map(|&i| table.ratings[i]).collect(),
        genres: table.genres.clone(),
    };
    Ok((pick(&a), pick(&b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p() -> &'static Path {
        Path::new("ratings.dat")
    }

    #[test]
    fn parses_a_line() {
        let r = parse_ratings("1::1193::5::978300760\n", p()).unwrap();
        assert_eq!(
            r,
            vec![Rating {
                user: 1,
                movie: 1193,
                value: 5.0
            }]
        );
    }

    #[test]
    fn empty_input_is_empty_table() {
        assert!(parse_ratings("", p()).unwrap().is_empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_ratings("1::2::3::4\n1::x::3::4\n", p()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
        assert!(parse_ratings("1::2::9::4\n", p()).is_err());
        assert!(parse_ratings("1::2::3::4\n1::2::4::5\n", p()).is_err());
    }

    #[test]
    fn parses_movie_genres() {
        let m = parse_movies("1::Toy Story (1995)::Animation|Children's|Comedy\n", p()).unwrap();
        assert_eq!(m[&1], vec!["Animation", "Children's", "Comedy"]);
    }

    fn table(pairs: &[(u32, u32)]) -> RatingsTable {
        RatingsTable {
            ratings: pairs
                .iter()
                .map(|&(user, movie)| Rating { user, movie, value: 3.0 })
                .collect(),
            genres: BTreeMap::new(),
        }
    }

    #[test]
    fn zero_thresholds_keep_everything() {
        let t = table(&[(1, 1), (1, 2), (2, 1)]);
        assert_eq!(filter_dense(&t, 0, 0), t);
    }

    #[test]
    fn sparse_user_removed() {
        let t = table(&[(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)]);
        let f = filter_dense(&t, 2, 0);
        assert!(!f.users().contains(&3));
        assert_eq!(f.len(), 4);
    }

    #[test]
    fn fixpoint_can_remove_more() {
        // Dropping movie 3 leaves user 3 with one rating.
        let t = table(&[(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 3)]);
        let once = filter_dense(&t, 2, 2);
        assert!(once.users().contains(&3));
        let fix = filter_dense_fixpoint(&t, 2, 2);
        assert!(!fix.users().contains(&3));
    }

    #[test]
    fn split_is_exact_partition() {
        let pairs: Vec<(u32, u32)> = (0..100).map(|i| (i / 10, i % 10)).collect();
        let t = table(&pairs);
        let (a, b) = split_ratings(&t, 0.5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!((a.len(), b.len()), (50, 50));
        let mut all: Vec<(u32, u32)> = a.ratings.iter().chain(&b.ratings).map(|r| (r.user, r.movie)).collect();
        all.sort_unstable();
        let mut expect = pairs.clone();
        expect.sort_unstable();
        assert_eq!(all, expect);
        let (a2, _) = split_ratings(&t, 0.5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, a2);
    }

    #[test]
    fn dense_indices_follow_sorted_ids() {
        let t = table(&[(7, 30), (3, 10)]);
        let d = t.dense();
        assert_eq!(d.user_ids, vec![3, 7]);
        assert_eq!(d.entries, vec![(1, 1, 3.0), (0, 0, 3.0)]);
    }
}
