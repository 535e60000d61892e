use std::fmt;

use super::style::{parse_inline_style, style_value};
use super::{Document, DomError, NodeRef};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorValue {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    pub alpha: f64,
}

impl ColorValue {
    pub const BLACK: ColorValue = ColorValue::rgb(0, 0, 0);
    pub const WHITE: ColorValue = ColorValue::rgb(255, 255, 255);

    pub const fn rgb(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b, alpha: 1.0 }
    }

    /// Parses hex, `rgb()`/`rgba()`, `hsl()` and named colors.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        let c = csscolorparser::parse(s).ok()?;
        let [r, g, b, _] = c.to_rgba8();
        let alpha = f64::from(c.a).clamp(0.0, 1.0);
        Some(Self { r, g, b, alpha })
    }

    /// Source-over compositing of `self` onto an opaque `under`.
    pub fn over(self, under: ColorValue) -> ColorValue {
        if self.alpha >= 1.0 {
            return ColorValue { alpha: 1.0, ..self };
        }
        let a = self.alpha;
        let mix = |top: u8, bottom: u8| -> u8 {
            (f64::from(top) * a + f64::from(bottom) * (1.0 - a))
                .round()
                .clamp(0.0, 255.0) as u8
        };
        ColorValue::rgb(mix(self.r, under.r), mix(self.g, under.g), mix(self.b, under.b))
    }

    pub fn to_hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }
}

impl fmt::Display for ColorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alpha >= 1.0 {
            f.write_str(&self.to_hex())
        } else {
            write!(f, "rgba({}, {}, {}, {})", self.r, self.g, self.b, self.alpha)
        }
    }
}

/// First token of a `background` shorthand that parses as a color.
fn background_shorthand_color(value: &str) -> Option<ColorValue> {
    let mut depth = 0usize;
    let mut start = 0;
    let mut tokens = Vec::new();
    for (i, c) in value.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if c.is_ascii_whitespace() && depth == 0 => {
                tokens.push(&value[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    tokens.push(&value[start..]);
    tokens
        .into_iter()
        .filter(|t| !t.is_empty() && !t.contains("url("))
        .find_map(ColorValue::parse)
}

/// Effective foreground and background of a node from inline styles of the
/// node and its ancestors. Semi-transparent layers are composited over the
/// layers beneath them, ending on a white canvas; the foreground defaults to
/// black. Unparseable values are skipped.
pub fn resolve_colors(doc: &Document, node: &NodeRef) -> Result<(ColorValue, ColorValue), DomError> {
    doc.resolve(node)?;
    let chain = doc.ancestry(node.path());
    let mut fg = None;
    let mut layers = Vec::new();
    let mut opaque = false;
    for n in chain.iter().rev() {
        if fg.is_some() && opaque {
            break;
        }
        let Some(style) = n.attr("style") else { continue };
        let decls = parse_inline_style(style);
        if fg.is_none() {
            fg = style_value(&decls, "color").and_then(ColorValue::parse);
        }
        let bg = decls
            .iter()
            .rev()
            .find_map(|d| match d.property.as_str() {
                "background-color" => Some(ColorValue::parse(&d.value)),
                "background" => Some(background_shorthand_color(&d.value)),
                _ => None,
            })
            .flatten();
        if opaque {
            continue;
        }
        if let Some(bg) = bg {
            layers.push(bg);
            opaque = bg.alpha >= 1.0;
        }
    }
    let background = layers
        .iter()
        .rev()
        .fold(ColorValue::WHITE, |under, layer| layer.over(under));
    let foreground = fg.unwrap_or(ColorValue::BLACK).over(background);
    Ok((foreground, background))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::{parse_document, NodePath};

    fn colors_of(html: &str, path: &[usize]) -> (String, String) {
        let d = parse_document(html);
        let r = d.node_ref(NodePath(path.to_vec())).unwrap();
        let (f, b) = resolve_colors(&d, &r).unwrap();
        (f.to_hex(), b.to_hex())
    }

    #[test]
    fn parses_common_forms() {
        assert_eq!(ColorValue::parse("#abc"), Some(ColorValue::rgb(0xaa, 0xbb, 0xcc)));
        assert_eq!(ColorValue::parse("rgb(1, 2, 3)"), Some(ColorValue::rgb(1, 2, 3)));
        let c = ColorValue::parse("rgba(10,20,30,0.5)").unwrap();
        assert_eq!((c.r, c.g, c.b), (10, 20, 30));
        assert!((c.alpha - 0.5).abs() < 1e-6);
        assert_eq!(ColorValue::parse("notacolor"), None);
    }

    #[test]
    fn defaults_and_cascade() {
        assert_eq!(colors_of("<p>text</p>", &[0]), ("#000000".into(), "#ffffff".into()));
        assert_eq!(
            colors_of(r#"<div style="background:#1A1A1A"><p style="color:red">x</p></div>"#, &[0, 0]),
            ("#ff0000".into(), "#1a1a1a".into())
        );
    }

    #[test]
    fn unparseable_values_fall_through() {
        assert_eq!(
            colors_of(r#"<div style="color:#123456;background-color:#eee"><p style="color:zzz;background-color:bogus">x</p></div>"#, &[0, 0]),
            ("#123456".into(), "#eeeeee".into())
        );
    }

    #[test]
    fn translucent_layers_are_composited() {
        let (f, b) = colors_of(
            r#"<div style="background-color:#000"><p style="background-color:rgba(255,255,255,0.5);color:rgba(0,0,0,0.5)">x</p></div>"#,
            &[0, 0],
        );
        assert_eq!(b, "#808080");
        assert_eq!(f, "#404040");
    }

    #[test]
    fn foreground_is_inherited_past_an_opaque_background() {
        assert_eq!(
            colors_of(r#"<body style="color:#fafafa"><div style="background:#333"><p>x</p></div></body>"#, &[0, 0, 0]),
            ("#fafafa".into(), "#333333".into())
        );
    }
}
