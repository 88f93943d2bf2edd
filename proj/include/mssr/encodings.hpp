// Generators for the session-calculus models of Rust concurrency
// primitives: mpsc channels (synchronous and buffered), Mutex, and RwLock.
// Output is surface-syntax text consumable by the parser and every analysis.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mssr {

struct EncodingError : std::runtime_error {
  explicit EncodingError(const std::string& m) : std::runtime_error(m) {}
};

struct Encoding {
  std::string dsl;        // declarations, one protocol suite
  std::string main_name;  // entry process
  std::optional<std::string> global_name; // synthesized protocol, when one exists
};

// Senders p1..pK each transmit `sends` values to the single receiver q.
// Buffer size zero: fully synchronous. A protocol is synthesized for the
// single-sender case; multi-sender compositions are checked through the
// communication analysis and the explorer instead.
Encoding encode_mpsc_sync(int senders, int sends = 1);

// Buffered channel with a scheduler thread holding a queue of capacity n;
// clients retire through an explicit shutdown handshake so finished systems
// terminate instead of idling.
Encoding encode_mpsc_buffered(int senders, int buffer, int sends = 1);

enum class MutexVerb { Lock, TryLock, Unlock };
enum class RwVerb { Read, DropRead, Write, DropWrite };

struct MutexSpec {
  int threads = 1;
  std::vector<std::vector<MutexVerb>> scripts; // one per thread
};

struct RwLockSpec {
  int threads = 1;
  std::vector<std::vector<RwVerb>> scripts;
};

// A try_lock that succeeds releases immediately; a plain lock holds until
// the script's unlock.
Encoding encode_mutex(const MutexSpec& spec);
Encoding encode_rwlock(const RwLockSpec& spec);

// Script files: a `thread` line opens each section, one verb per line.
MutexSpec parse_mutex_script(const std::string& text, int threads);
RwLockSpec parse_rwlock_script(const std::string& text, int threads);

} // namespace mssr
