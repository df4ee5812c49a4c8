#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sde {

/// Canonical text form of a program output. Two normal outcomes are equal
/// iff their canonical strings are equal.
///
///  - bytes are decoded as UTF-8, invalid sequences replaced by U+FFFD;
///    input with no decodable character at all throws OutputDecodeError;
///  - text that is a complete JSON value is re-serialised compactly with
///    sorted object keys;
///  - otherwise trailing whitespace is removed per line and at the end;
///  - in both forms floating-point literals are rewritten with 9
///    significant digits; integer literals are kept verbatim.
///
/// normalize(normalize(x)) == normalize(x).
std::string normalize(std::string_view raw);

/// Canonical serialisation of a JSON text, or nullopt if `text` is not a
/// single JSON value. Accepts the NaN / Infinity / -Infinity literals that
/// Python's json module emits.
std::optional<std::string> canonical_json(std::string_view text);

/// printf("%#.9g") with non-finite values spelled NaN / Infinity / -Infinity.
std::string format_float(double value);

/// Raw text of a top-level member of a JSON object, without re-parsing the
/// value through a double. nullopt when `text` is not an object or the key
/// is absent.
std::optional<std::string_view> raw_member(std::string_view text, std::string_view key);

}  // namespace sde
