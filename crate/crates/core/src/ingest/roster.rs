use std::collections::HashMap;
use std::io::Read;

use super::IngestError;
use crate::model::PlayerId;

#[derive(Debug, Clone, PartialEq)]
pub struct Player {
    pub id: PlayerId,
    pub display_name: Option<String>,
    /// One or two tag ids.
    pub tags: Vec<String>,
    pub pager_id: u16,
}

/// Player list with a tag-to-player index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Roster {
    players: Vec<Player>,
    by_tag: HashMap<String, usize>,
    by_id: HashMap<PlayerId, usize>,
}

impl Roster {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a player. Pager ids default to the roster position (1-based).
    pub fn add(
        &mut self,
        id: PlayerId,
        display_name: Option<String>,
        tags: Vec<String>,
        pager_id: Option<u16>,
    ) -> Result<(), IngestError> {
        if tags.is_empty() || tags.len() > 2 {
            return Err(IngestError::BadRoster(format!(
                "player `{id}` needs one or two tags"
            )));
        }
        if self.by_id.contains_key(&id) {
            return Err(IngestError::BadRoster(format!("duplicate player `{id}`")));
        }
        for t in &tags {
            if self.by_tag.contains_key(t) {
                return Err(IngestError::BadRoster(format!(
                    "tag `{t}` is mapped to two players"
                )));
            }
        }
        let idx = self.players.len();
        let pager_id = pager_id.unwrap_or_else(|| (idx + 1).min(9999) as u16);
        for t in &tags {
            self.by_tag.insert(t.clone(), idx);
        }
        self.by_id.insert(id.clone(), idx);
        self.players.push(Player {
            id,
            display_name,
            tags,
            pager_id,
        });
        Ok(())
    }

    /// One tag per player, named after the player.
    pub fn single_tag<I, S>(ids: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut r = Roster::new();
        for id in ids {
            let id: String = id.into();
            r.add(PlayerId(id.clone()), None, vec![id], None)?;
        }
        Ok(r)
    }

    /// Groups tags named `<player>/<suffix>` under `<player>`; tags without a
    /// slash become single-tag players. Players are ordered by first appearance.
    pub fn infer_from_tags<'a, I>(tags: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut r = Roster::new();
        for tag in tags {
            r.insert_inferred(tag)?;
        }
        Ok(r)
    }

    /// Reads `player_id,display_name,tag_id_1,tag_id_2[,pager_id]` rows.
    /// A header row is optional and detected by its first cell.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, IngestError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut r = Roster::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let cell = |k: usize| row.get(k).filter(|s| !s.is_empty());
            let Some(id) = cell(0) else { continue };
            if i == 0 && id == "player_id" {
                continue;
            }
            let tags: Vec<String> = [cell(2), cell(3)].into_iter().flatten().map(String::from).collect();
            let pager = match cell(4) {
                Some(p) => Some(p.parse::<u16>().map_err(|_| {
                    IngestError::BadRoster(format!("bad pager id `{p}` for `{id}`"))
                })?),
                None => None,
            };
            r.add(PlayerId::new(id), cell(1).map(String::from), tags, pager)?;
        }
        Ok(r)
    }

    /// Maps an unknown tag using the `<player>/<suffix>` naming rule, adding
    /// it to an existing player (up to two tags) or creating a new one.
    /// Returns the player's roster position.
    pub fn insert_inferred(&mut self, tag: &str) -> Result<usize, IngestError> {
        if let Some(i) = self.index_of_tag(tag) {
            return Ok(i);
        }
        let id = PlayerId::new(tag.rsplit_once('/').map_or(tag, |(p, _)| p));
        if let Some(&i) = self.by_id.get(&id) {
            let player = &mut self.players[i];
            if player.tags.len() >= 2 {
                return Err(IngestError::BadRoster(format!(
                    "player `{id}` already has two tags, cannot add `{tag}`"
                )));
            }
            player.tags.push(tag.to_owned());
            self.by_tag.insert(tag.to_owned(), i);
            return Ok(i);
        }
        self.add(id, None, vec![tag.to_owned()], None)?;
        Ok(self.players.len() - 1)
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    pub fn player_for_tag(&self, tag: &str) -> Option<&Player> {
        self.by_tag.get(tag).map(|&i| &self.players[i])
    }

    /// Roster position of the player carrying `tag`.
    pub fn index_of_tag(&self, tag: &str) -> Option<usize> {
        self.by_tag.get(tag).copied()
    }

    pub fn get(&self, id: &PlayerId) -> Option<&Player> {
        self.by_id.get(id).map(|&i| &self.players[i])
    }

    pub fn pager_for(&self, id: &PlayerId) -> Option<u16> {
        self.get(id).map(|p| p.pager_id)
    }
}
