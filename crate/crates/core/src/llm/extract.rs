use thiserror::Error;

use crate::prompt::{FENCE_CLOSE, FENCE_OPEN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error("no fedsl codeblock found in the response")]
    NoBlock,
    #[error("codeblock is not closed with the end fence")]
    Unterminated,
}

/// Body of the first block opened with the fedsl fence. It ends at the
/// closing fence or, failing that, at a plain ``` fence.
pub fn extract_code_block(response: &str) -> Result<String, ExtractError> {
    let start = response.find(FENCE_OPEN).ok_or(ExtractError::NoBlock)?;
    let mut body = &response[start + FENCE_OPEN.len()..];
    // Anything left on the opening line (e.g. trailing spaces) is not code.
    body = match body.find('\n') {
        Some(i) => &body[i + 1..],
        None => "",
    };
    // A second opening fence ends the first block.
    let limit = body.find(FENCE_OPEN).unwrap_or(body.len());
    let search = &body[..limit];
    let end = search.find(FENCE_CLOSE).or_else(|| search.find("```")).ok_or(ExtractError::Unterminated)?;
    let code = &body[..end];
    let rest = &body[end..];
    if rest.matches(FENCE_OPEN).count() > 0 {
        log::info!("response contains more than one codeblock; only the first is used");
    }
    let code = code.strip_suffix('\n').unwrap_or(code);
    let code = code.strip_suffix('\r').unwrap_or(code);
    Ok(code.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surrounded_by_prose() {
        assert_eq!(extract_code_block("text\n```fedsl\nX\n```end\nmore").unwrap(), "X");
    }

    #[test]
    fn only_block() {
        let body = "feature \"a\" {\n    usefulness: \"u\"\n    expr: 1\n}";
        assert_eq!(extract_code_block(&format!("```fedsl\n{body}\n```end")).unwrap(), body);
    }

    #[test]
    fn plain_close_and_errors() {
        assert_eq!(extract_code_block("```fedsl\nY\n```\n").unwrap(), "Y");
        assert_eq!(extract_code_block("no code here"), Err(ExtractError::NoBlock));
        assert_eq!(extract_code_block("```fedsl\nZ"), Err(ExtractError::Unterminated));
    }

    #[test]
    fn first_block_wins() {
        let r = "```fedsl\nA\n```end\n```fedsl\nB\n```end";
        assert_eq!(extract_code_block(r).unwrap(), "A");
        let nested = "```fedsl\nA\n```fedsl\nB\n```end";
        assert!(!extract_code_block(nested).unwrap_or_default().contains(FENCE_OPEN));
    }
}
