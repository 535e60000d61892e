//! Lenient HTML tokenizer.
//!
//! Never fails: anything that does not form a tag degrades to text. Raw-text
//! elements (`script`, `style`) and escapable raw-text elements (`title`,
//! `textarea`) switch the tokenizer into a mode that only looks for the
//! matching end tag.

use super::entities::decode_entities;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Doctype(String),
    StartTag {
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
    },
    EndTag(String),
    Text(String),
    Comment(String),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RawKind {
    Raw,
    Escapable,
}

pub(crate) fn raw_text_kind(name: &str) -> Option<bool> {
    match name {
        "script" | "style" => Some(false),
        "title" | "textarea" => Some(true),
        _ => None,
    }
}

pub struct Tokenizer<'a> {
    src: &'a str,
    pos: usize,
    raw: Option<(String, RawKind)>,
}

impl<'a> Tokenizer<'a> {
    pub fn new(src: &'a str) -> Self {
        Self {
            src,
            pos: 0,
            raw: None,
        }
    }

    /// Byte offset of the next unread character.
    pub fn position(&self) -> usize {
        self.pos
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn raw_text(&mut self, tag: String, kind: RawKind) -> Option<Token> {
        let rest = self.rest();
        let needle = format!("</{tag}");
        let lower = rest.to_ascii_lowercase();
        let mut from = 0;
        let end = loop {
            match lower[from..].find(&needle) {
                Some(off) => {
                    let at = from + off;
                    let after = at + needle.len();
                    match lower.as_bytes().get(after) {
                        None | Some(b'>' | b'/' | b' ' | b'\t' | b'\n' | b'\r' | b'\x0c') => {
                            break Some(at)
                        }
                        _ => from = after,
                    }
                }
                None => break None,
            }
        };
        match end {
            Some(at) if at > 0 => {
                let content = &rest[..at];
                self.pos += at;
                self.raw = Some((tag, kind));
                Some(Token::Text(match kind {
                    RawKind::Raw => content.to_string(),
                    RawKind::Escapable => decode_entities(content),
                }))
            }
            Some(_) => {
                // Positioned at the end tag; consume through '>'.
                let close = rest.find('>').map(|i| i + 1).unwrap_or(rest.len());
                self.pos += close;
                Some(Token::EndTag(tag))
            }
            None => {
                self.pos = self.src.len();
                if rest.is_empty() {
                    None
                } else {
                    Some(Token::Text(match kind {
                        RawKind::Raw => rest.to_string(),
                        RawKind::Escapable => decode_entities(rest),
                    }))
                }
            }
        }
    }

    fn text_run(&mut self) -> Token {
        let rest = self.rest();
        // Skip the leading char so a lone '<' still makes progress.
        let first = rest.chars().next().map(char::len_utf8).unwrap_or(0);
        let end = rest[first..].find('<').map(|i| i + first).unwrap_or(rest.len());
        self.pos += end;
        Token::Text(decode_entities(&rest[..end]))
    }

    fn comment(&mut self) -> Token {
        let rest = self.rest();
        let body = &rest[4..];
        if body.starts_with('>') {
            self.pos += 5;
            return Token::Comment(String::new());
        }
        if body.starts_with("->") {
            self.pos += 6;
            return Token::Comment(String::new());
        }
        match body.find("-->") {
            Some(i) => {
                self.pos += 4 + i + 3;
                Token::Comment(body[..i].to_string())
            }
            None => {
                self.pos = self.src.len();
                Token::Comment(body.to_string())
            }
        }
    }

    fn bogus_comment(&mut self, skip: usize) -> Token {
        let rest = self.rest();
        let body = &rest[skip..];
        match body.find('>') {
            Some(i) => {
                self.pos += skip + i + 1;
                Token::Comment(body[..i].to_string())
            }
            None => {
                self.pos = self.src.len();
                Token::Comment(body.to_string())
            }
        }
    }

    fn doctype(&mut self) -> Token {
        let rest = self.rest();
        let body = &rest[9..];
        let (content, consumed) = match body.find('>') {
            Some(i) => (&body[..i], 9 + i + 1),
            None => (body, rest.len()),
        };
        self.pos += consumed;
        Token::Doctype(content.trim().to_string())
    }

    fn end_tag(&mut self) -> Option<Token> {
        let rest = self.rest();
        let body = &rest[2..];
        let name_len = body
            .find(|c: char| c.is_ascii_whitespace() || c == '/' || c == '>')
            .unwrap_or(body.len());
        match body[name_len..].find('>') {
            Some(i) => {
                self.pos += 2 + name_len + i + 1;
                Some(Token::EndTag(body[..name_len].to_ascii_lowercase()))
            }
            None => {
                // Unterminated end tag at EOF degrades to text.
                self.pos = self.src.len();
                Some(Token::Text(rest.to_string()))
            }
        }
    }

    fn start_tag(&mut self) -> Token {
        let rest = self.rest();
        let bytes = rest.as_bytes();
        let mut i = 1;
        while i < bytes.len() && !is_ws(bytes[i]) && bytes[i] != b'/' && bytes[i] != b'>' {
            i += 1;
        }
        let name = rest[1..i].to_ascii_lowercase();
        let mut attrs: Vec<(String, String)> = Vec::new();
        let mut self_closing = false;
        loop {
            while i < bytes.len() && (is_ws(bytes[i]) || (bytes[i] == b'/' && bytes.get(i + 1) != Some(&b'>'))) {
                i += 1;
            }
            if i >= bytes.len() {
                return self.unterminated(rest);
            }
            if bytes[i] == b'>' {
                i += 1;
                break;
            }
            if bytes[i] == b'/' {
                self_closing = true;
                i += 2;
                break;
            }
            let name_start = i;
            // a leading '=' belongs to the name
            i += rest[i..].chars().next().map(char::len_utf8).unwrap_or(1);
            while i < bytes.len() && !is_ws(bytes[i]) && !matches!(bytes[i], b'/' | b'>' | b'=') {
                i += 1;
            }
            let attr_name = rest[name_start..i].to_ascii_lowercase();
            let mut j = i;
            while j < bytes.len() && is_ws(bytes[j]) {
                j += 1;
            }
            let mut value = String::new();
            if j < bytes.len() && bytes[j] == b'=' {
                j += 1;
                while j < bytes.len() && is_ws(bytes[j]) {
                    j += 1;
                }
                if j >= bytes.len() {
                    return self.unterminated(rest);
                }
                if bytes[j] == b'"' || bytes[j] == b'\'' {
                    let q = bytes[j];
                    match rest[j + 1..].find(q as char) {
                        Some(k) => {
                            value = decode_entities(&rest[j + 1..j + 1 + k]);
                            j = j + 1 + k + 1;
                        }
                        None => return self.unterminated(rest),
                    }
                } else {
                    let start = j;
                    while j < bytes.len() && !is_ws(bytes[j]) && bytes[j] != b'>' {
                        j += 1;
                    }
                    value = decode_entities(&rest[start..j]);
                }
                i = j;
            }
            if !attrs.iter().any(|(n, _)| *n == attr_name) {
                attrs.push((attr_name, value));
            }
        }
        self.pos += i;
        if !self_closing {
            if let Some(escapable) = raw_text_kind(&name) {
                let kind = if escapable {
                    RawKind::Escapable
                } else {
                    RawKind::Raw
                };
                self.raw = Some((name.clone(), kind));
            }
        }
        Token::StartTag {
            name,
            attrs,
            self_closing,
        }
    }

    fn unterminated(&mut self, rest: &str) -> Token {
        self.pos = self.src.len();
        Token::Text(rest.to_string())
    }
}

fn is_ws(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | b'\x0c')
}

fn starts_with_ci(s: &str, prefix: &str) -> bool {
    s.len() >= prefix.len() && s.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

impl Iterator for Tokenizer<'_> {
    type Item = Token;

    fn next(&mut self) -> Option<Token> {
        if let Some((tag, kind)) = self.raw.take() {
            return self.raw_text(tag, kind);
        }
        let rest = self.rest();
        if rest.is_empty() {
            return None;
        }
        let bytes = rest.as_bytes();
        if bytes[0] != b'<' || bytes.len() < 2 {
            return Some(self.text_run());
        }
        Some(match bytes[1] {
            b'!' if rest.starts_with("<!--") => self.comment(),
            b'!' if starts_with_ci(rest, "<!doctype") => self.doctype(),
            b'!' => self.bogus_comment(2),
            b'?' => self.bogus_comment(1),
            b'/' => match bytes.get(2) {
                Some(c) if c.is_ascii_alphabetic() => return self.end_tag(),
                Some(b'>') => {
                    self.pos += 3;
                    return self.next();
                }
                Some(_) => self.bogus_comment(2),
                None => self.text_run(),
            },
            c if c.is_ascii_alphabetic() => self.start_tag(),
            _ => self.text_run(),
        })
    }
}

pub fn tokenize(src: &str) -> Tokenizer<'_> {
    Tokenizer::new(src)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Token> {
        tokenize(s).collect()
    }

    #[test]
    fn start_tag_with_mixed_attribute_quoting() {
        let t = toks(r#"<IMG src='a.png' alt=x data-y="1 &amp; 2">"#);
        assert_eq!(
            t,
            vec![Token::StartTag {
                name: "img".into(),
                attrs: vec![
                    ("src".into(), "a.png".into()),
                    ("alt".into(), "x".into()),
                    ("data-y".into(), "1 & 2".into())
                ],
                self_closing: false
            }]
        );
    }

    #[test]
    fn script_content_is_raw() {
        let t = toks("<script>if (a<b) {}</SCRIPT >x");
        assert_eq!(t[1], Token::Text("if (a<b) {}".into()));
        assert_eq!(t[2], Token::EndTag("script".into()));
        assert_eq!(t[3], Token::Text("x".into()));
    }

    #[test]
    fn unterminated_tag_degrades_to_text() {
        assert_eq!(toks("a<div class=\"x"), vec![
            Token::Text("a".into()),
            Token::Text("<div class=\"x".into())
        ]);
    }

    #[test]
    fn comment_shapes() {
        assert_eq!(toks("<!-->"), vec![Token::Comment(String::new())]);
        assert_eq!(toks("<!--a-->"), vec![Token::Comment("a".into())]);
        assert_eq!(toks("<!x>"), vec![Token::Comment("x".into())]);
        assert_eq!(toks("<!DOCTYPE html>"), vec![Token::Doctype("html".into())]);
    }

    #[test]
    fn lone_angle_brackets_are_text() {
        assert_eq!(toks("1 < 2"), vec![Token::Text("1 ".into()), Token::Text("< 2".into())]);
    }
}
