//! JUnit 4 detection from Maven `pom.xml` text.

/// Returns true iff some `<dependency>` element declares groupId `junit`,
/// artifactId `junit`, and a version starting with `4.`.
///
/// The check is textual: XML comments are stripped, then each
/// `<dependency>...</dependency>` span is searched for the three child
/// values. Malformed input never fails — it simply does not match, with a
/// warning logged — because a broken build file just means we cannot prove
/// the project uses JUnit 4.
pub fn scan_pom(pom_text: &str) -> bool {
    let text = strip_xml_comments(pom_text);
    let mut rest = text.as_str();
    let mut saw_malformed = false;

    while let Some(start) = find_tag_open(rest, "dependency") {
        let after = &rest[start..];
        let Some(end) = after.find("</dependency>") else {
            saw_malformed = true;
            break;
        };
        let block = &after[..end];
        if tag_value(block, "groupId") == Some("junit")
            && tag_value(block, "artifactId") == Some("junit")
            && tag_value(block, "version").map_or(false, |v| v.starts_with("4."))
        {
            return true;
        }
        rest = &after[end + "</dependency>".len()..];
    }

    if saw_malformed {
        log::warn!("malformed pom.xml: unclosed <dependency> element; treating as non-JUnit-4");
    }
    false
}

fn strip_xml_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("<!--") {
        out.push_str(&rest[..start]);
        match rest[start..].find("-->") {
            Some(end) => rest = &rest[start + end + 3..],
            None => return out,
        }
    }
    out.push_str(rest);
    out
}

/// Byte offset just past `<name>` (tolerating attributes), or None.
fn find_tag_open(text: &str, name: &str) -> Option<usize> {
    let open = format!("<{name}");
    let mut from = 0;
    while let Some(pos) = text[from..].find(&open) {
        let at = from + pos;
        let after = &text[at + open.len()..];
        // Reject prefixes like <dependencyManagement>.
        match after.chars().next() {
            Some('>') => return Some(at + open.len() + 1),
            Some(c) if c.is_whitespace() => {
                if let Some(gt) = after.find('>') {
                    return Some(at + open.len() + gt + 1);
                }
                return None;
            }
            _ => from = at + open.len(),
        }
    }
    None
}

/// Trimmed text content of the first `<name>...</name>` child in `block`.
fn tag_value<'a>(block: &'a str, name: &str) -> Option<&'a str> {
    let start = find_tag_open(block, name)?;
    let close = format!("</{name}>");
    let end = block[start..].find(&close)?;
    Some(block[start..start + end].trim())
}
