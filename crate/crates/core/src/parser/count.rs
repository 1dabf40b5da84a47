use thiserror::Error;

/// Separators Scholar may put between digit groups.
const SEPARATORS: [char; 4] = [',', ' ', '\u{00A0}', '\u{202F}'];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a count: {0:?}")]
pub struct NotANumber(pub String);

/// Parses a metric cell such as `12,345` or `1 234` into an integer.
pub fn parse_count(text: &str) -> Result<u64, NotANumber> {
    let digits: String = text.chars().filter(|c| !SEPARATORS.contains(c)).collect();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(NotANumber(text.to_string()));
    }
    digits.parse().map_err(|_| NotANumber(text.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plain_values() {
        assert_eq!(parse_count("0"), Ok(0));
        assert_eq!(parse_count("12,345"), Ok(12345));
        assert_eq!(parse_count("1\u{202F}234"), Ok(1234));
        assert_eq!(parse_count("2\u{00A0}310"), Ok(2310));
        assert_eq!(parse_count("1 000 000"), Ok(1_000_000));
    }

    #[test]
    fn rejects_non_digits() {
        for bad in ["", "   ", ",", "12a", "-5", "1.5", "١٢", "\t7"] {
            assert!(parse_count(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn rejects_overflow() {
        assert!(parse_count("99999999999999999999999").is_err());
    }

    fn separator() -> impl Strategy<Value = &'static str> {
        prop_oneof![Just(","), Just(" "), Just("\u{00A0}"), Just("\u{202F}"), Just("")]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        // Oracle: the digit groups were generated separately, so the expected
        // value is their concatenation read as a decimal number.
        #[test]
        fn matches_group_concatenation(
            groups in prop::collection::vec(("[0-9]{1,3}", separator()), 1..6)
        ) {
            let text: String = groups.iter().map(|(g, s)| format!("{g}{s}")).collect();
            let expected: u64 = groups.iter().map(|(g, _)| g.as_str()).collect::<String>().parse().unwrap();
            prop_assert_eq!(parse_count(&text), Ok(expected));
        }
    }
}
