use serde::Serialize;

/// Architecture of one of the pretrained uncased Turkish BERT sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpec {
    pub name: &'static str,
    pub hidden_size: u32,
    pub attn_heads: u32,
    pub hidden_layers: u32,
    pub params_millions: f64,
}

impl ModelSpec {
    pub const ALL: [ModelSpec; 5] = [
        ModelSpec { name: "tiny", hidden_size: 128, attn_heads: 2, hidden_layers: 2, params_millions: 4.6 },
        ModelSpec { name: "mini", hidden_size: 256, attn_heads: 4, hidden_layers: 4, params_millions: 11.6 },
        ModelSpec { name: "small", hidden_size: 512, attn_heads: 8, hidden_layers: 4, params_millions: 29.6 },
        ModelSpec { name: "medium", hidden_size: 512, attn_heads: 8, hidden_layers: 8, params_millions: 42.2 },
        ModelSpec { name: "base", hidden_size: 768, attn_heads: 12, hidden_layers: 12, params_millions: 110.7 },
    ];

    /// Looks a size up by name, case-insensitively.
    pub fn by_name(name: &str) -> Option<ModelSpec> {
        let name = name.to_ascii_lowercase();
        Self::ALL.iter().copied().find(|m| m.name == name)
    }

    pub fn head_dim(&self) -> u32 {
        self.hidden_size / self.attn_heads
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_sizes() {
        assert_eq!(ModelSpec::ALL.len(), 5);
        let base = ModelSpec::by_name("Base").unwrap();
        assert_eq!((base.hidden_size, base.attn_heads, base.hidden_layers), (768, 12, 12));
        assert_eq!(base.params_millions, 110.7);
        assert_eq!(ModelSpec::by_name("tiny").unwrap().params_millions, 4.6);
        assert!(ModelSpec::by_name("large").is_none());
        // every size uses 64-dimensional attention heads
        assert!(ModelSpec::ALL.iter().all(|m| m.head_dim() == 64));
        // parameter count grows with size
        assert!(ModelSpec::ALL.windows(2).all(|w| w[0].params_millions < w[1].params_millions));
    }
}
