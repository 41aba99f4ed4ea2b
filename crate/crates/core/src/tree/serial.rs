use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ClusterNode, ClusterTree, NodeId};
use crate::error::{Error, Result};

pub const TREE_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TreeDocument {
    version: u32,
    n_samples: usize,
    root: NodeId,
    next_id: NodeId,
    split_order: Vec<NodeId>,
    nodes: Vec<ClusterNode>,
}

impl From<&ClusterTree> for TreeDocument {
    fn from(t: &ClusterTree) -> Self {
        Self {
            version: TREE_FORMAT_VERSION,
            n_samples: t.n_samples,
            root: t.root,
            next_id: t.next_id,
            split_order: t.split_order.clone(),
            nodes: t.nodes.values().cloned().collect(),
        }
    }
}

impl TryFrom<TreeDocument> for ClusterTree {
    type Error = Error;

    fn try_from(doc: TreeDocument) -> Result<Self> {
        if doc.version != TREE_FORMAT_VERSION {
            return Err(Error::Structure(format!(
                "unsupported tree format version {} (expected {TREE_FORMAT_VERSION})",
                doc.version
            )));
        }
        let mut nodes = BTreeMap::new();
        for n in doc.nodes {
            let id = n.id;
            if nodes.insert(id, n).is_some() {
                return Err(Error::Structure(format!("duplicate node id {id}")));
            }
        }
        let tree = ClusterTree {
            nodes,
            root: doc.root,
            split_order: doc.split_order,
            next_id: doc.next_id,
            n_samples: doc.n_samples,
            recycled: HashMap::new(),
        };
        tree.validate()?;
        Ok(tree)
    }
}

impl Serialize for ClusterTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TreeDocument::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ClusterTree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = TreeDocument::deserialize(d)?;
        ClusterTree::try_from(doc).map_err(serde::de::Error::custom)
    }
}

impl ClusterTree {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TreeDocument = serde_json::from_str(text)?;
        ClusterTree::try_from(doc)
    }
}
