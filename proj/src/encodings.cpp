#include "mssr/encodings.hpp"

#include <algorithm>
#include <sstream>

namespace mssr {

namespace {

std::string joinv(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string subset_tag(unsigned mask) {
  std::string out;
  for (int i = 0; mask >> i; ++i)
    if (mask & (1u << i)) out += std::to_string(i + 1);
  return out.empty() ? "none" : out;
}

std::vector<int> members(unsigned mask) {
  std::vector<int> out;
  for (int i = 0; mask >> i; ++i)
    if (mask & (1u << i)) out.push_back(i + 1);
  return out;
}

} // namespace

Encoding encode_mpsc_sync(int senders, int sends) {
  if (senders < 1) throw EncodingError("an mpsc channel needs at least one sender");
  if (sends < 1) throw EncodingError("each sender must send at least once");
  std::ostringstream out;
  out << "# mpsc channel, synchronous (buffer 0), " << senders << " sender(s), " << sends
      << " send(s) each\n";
  std::optional<std::string> global;
  if (senders == 1) {
    // One sender: a plain chain of interactions types the whole system.
    std::string g = "end";
    for (int i = 0; i < sends; ++i) g = "p1 -> q : { x1(unit) . " + g + " }";
    out << "global G = " << g << "\n";
    global = "G";
  }
  for (int i = 1; i <= senders; ++i) {
    std::string body = "0";
    for (int k = 0; k < sends; ++k)
      body = "c[p" + std::to_string(i) + "][q] + x" + std::to_string(i) + "(()) . " + body;
    out << "process S" << i << " = " << body << "\n";
  }
  std::string recv = "0";
  for (int k = 0; k < senders * sends; ++k) {
    if (senders == 1) {
      recv = "c[q][p1] & { x1(v) . " + recv + " }";
    } else {
      std::vector<std::string> rows;
      for (int i = 1; i <= senders; ++i)
        rows.push_back("c[q][p" + std::to_string(i) + "] & x" + std::to_string(i) + "(v) . " +
                       recv);
      recv = "exists& { " + joinv(rows, ", ") + " }";
    }
  }
  out << "process R = " << recv << "\n";
  std::vector<std::string> parts;
  for (int i = 1; i <= senders; ++i) parts.push_back("S" + std::to_string(i));
  parts.push_back("R");
  out << "process Main = new c" << (global ? " : G" : "") << " . (" << joinv(parts, " | ")
      << ")\n";
  return {out.str(), "Main", global};
}

Encoding encode_mpsc_buffered(int senders, int buffer, int sends) {
  if (senders < 1) throw EncodingError("an mpsc channel needs at least one sender");
  if (buffer < 1) throw EncodingError("buffered encoding needs buffer size >= 1");
  if (sends < 1) throw EncodingError("each sender must send at least once");
  const unsigned full = (1u << senders) - 1;
  const int total = senders * sends;
  std::ostringstream defs;

  auto buf_name = [](int k, unsigned mask, bool rx) {
    return "Buf" + std::to_string(k) + "_s" + subset_tag(mask) + (rx ? "_r" : "_x");
  };
  auto wait_name = [](unsigned mask) { return "Wait_s" + subset_tag(mask); };

  std::vector<std::string> def_order;
  std::vector<std::string> def_bodies;

  for (int k = 0; k <= buffer; ++k) {
    for (unsigned mask = 0; mask <= full; ++mask) {
      for (int rx = 0; rx <= 1; ++rx) {
        std::vector<std::string> rows;
        if (k < buffer) {
          for (int i : members(mask)) {
            std::string si = std::to_string(i);
            std::string on_tx = buf_name(k + 1, mask, rx) + "()";
            std::string on_bye = buf_name(k, mask & ~(1u << (i - 1)), rx) + "()";
            rows.push_back("c[sc][p" + si + "] & x" + si + "(u) . c[sc][p" + si + "] & { tx" +
                           si + "(v) . " + on_tx + ", bye(b) . " + on_bye + " }");
          }
        }
        if (rx) {
          std::string on_more;
          if (k > 0)
            on_more = "c[sc][q] + rx(()) . " + buf_name(k - 1, mask, rx) + "()";
          else if (mask != 0)
            on_more = wait_name(mask) + "()";
          else
            on_more = "0"; // nothing buffered and every sender gone
          rows.push_back("c[sc][q] & req(u) . c[sc][q] & { more(m) . " + on_more + ", bye(b) . " +
                         buf_name(k, mask, false) + "() }");
        }
        std::string body = rows.empty() ? "0" : "exists& { " + joinv(rows, ", ") + " }";
        def_order.push_back(buf_name(k, mask, rx));
        def_bodies.push_back(body);
      }
    }
  }
  // Wait states: the receiver already asked for a value on an empty buffer;
  // the next send is forwarded straight through.
  for (unsigned mask = 1; mask <= full; ++mask) {
    std::vector<std::string> rows;
    for (int i : members(mask)) {
      std::string si = std::to_string(i);
      unsigned rest = mask & ~(1u << (i - 1));
      std::string on_bye = rest ? wait_name(rest) + "()" : "0";
      rows.push_back("c[sc][p" + si + "] & x" + si + "(u) . c[sc][p" + si + "] & { tx" + si +
                     "(v) . c[sc][q] + rx(()) . " + buf_name(0, mask, true) + "(), bye(b) . " +
                     on_bye + " }");
    }
    def_order.push_back(wait_name(mask));
    def_bodies.push_back("exists& { " + joinv(rows, ", ") + " }");
  }

  std::ostringstream out;
  out << "# mpsc channel, buffer " << buffer << ", " << senders << " sender(s), " << sends
      << " send(s) each\n";
  for (int i = 1; i <= senders; ++i) {
    std::string si = std::to_string(i);
    std::string body = "c[p" + si + "][sc] + x" + si + "(()) . c[p" + si + "][sc] + bye(()) . 0";
    for (int k = 0; k < sends; ++k)
      body = "c[p" + si + "][sc] + x" + si + "(()) . c[p" + si + "][sc] + tx" + si +
             "(()) . " + body;
    out << "process S" << i << " = " << body << "\n";
  }
  std::string recv = "c[q][sc] + req(()) . c[q][sc] + bye(()) . 0";
  for (int k = 0; k < total; ++k)
    recv = "c[q][sc] + req(()) . c[q][sc] + more(()) . c[q][sc] & { rx(v) . " + recv + " }";
  out << "process R = " << recv << "\n";

  std::string system = buf_name(0, full, true) + "()";
  std::vector<std::string> parts{system};
  for (int i = 1; i <= senders; ++i) parts.push_back("S" + std::to_string(i));
  parts.push_back("R");
  std::string wired = "(" + joinv(parts, " | ") + ")";
  for (size_t i = def_order.size(); i-- > 0;)
    wired = "def " + def_order[i] + "() = " + def_bodies[i] + " in " + wired;
  out << "process Main = new c . " << wired << "\n";
  return {out.str(), "Main", std::nullopt};
}

namespace {

std::string mutex_op(int thread, MutexVerb v, const std::string& rest) {
  std::string t = std::to_string(thread);
  std::string c = "m[t" + t + "][sm]";
  std::string connect = c + " + l" + t + "(()) . ";
  switch (v) {
    case MutexVerb::Lock:
      return connect + c + " + lock(()) . " + c + " & { ok(d) . " + rest + " }";
    case MutexVerb::TryLock:
      // On success the lock is released immediately, then the script resumes;
      // on block the script resumes directly.
      return connect + c + " + try_lock(()) . " + c + " & { ok(d) . " + connect + c +
             " + unlock(()) . " + rest + ", block(b) . " + rest + " }";
    case MutexVerb::Unlock:
      return connect + c + " + unlock(()) . " + rest;
  }
  return rest;
}

} // namespace

Encoding encode_mutex(const MutexSpec& spec) {
  if (spec.threads < 1) throw EncodingError("mutex needs at least one thread");
  if (static_cast<int>(spec.scripts.size()) != spec.threads)
    throw EncodingError("mutex needs one script per thread");
  for (int i = 0; i < spec.threads; ++i) {
    if (spec.scripts[i].empty()) throw EncodingError("empty script for thread " +
                                                     std::to_string(i + 1));
    int held = 0;
    for (MutexVerb v : spec.scripts[i]) {
      if (v == MutexVerb::Lock) held++;
      if (v == MutexVerb::Unlock) {
        if (held <= 0)
          throw EncodingError("thread " + std::to_string(i + 1) + " unlocks without holding");
        held--;
      }
    }
  }
  const unsigned full = (1u << spec.threads) - 1;
  std::vector<std::string> def_order;
  std::vector<std::string> def_bodies;
  auto idle_name = [](unsigned mask) { return "Idle_s" + subset_tag(mask); };
  auto locked_name = [](int holder, unsigned mask) {
    return "Locked" + std::to_string(holder) + "_s" + subset_tag(mask);
  };

  for (unsigned mask = 1; mask <= full; ++mask) {
    std::vector<std::string> rows;
    for (int i : members(mask)) {
      std::string ti = std::to_string(i);
      std::string c = "m[sm][t" + ti + "]";
      unsigned rest = mask & ~(1u << (i - 1));
      std::string on_bye = rest ? idle_name(rest) + "()" : "0";
      rows.push_back(c + " & l" + ti + "(u) . " + c + " & { lock(u2) . " + c + " + ok(()) . " +
                     locked_name(i, mask) + "(), try_lock(u3) . " + c + " + ok(()) . " +
                     locked_name(i, mask) + "(), bye(u4) . " + on_bye + " }");
    }
    def_order.push_back(idle_name(mask));
    def_bodies.push_back("exists& { " + joinv(rows, ", ") + " }");
  }
  for (unsigned mask = 1; mask <= full; ++mask) {
    for (int holder : members(mask)) {
      std::vector<std::string> rows;
      for (int j : members(mask)) {
        std::string tj = std::to_string(j);
        std::string c = "m[sm][t" + tj + "]";
        std::string arm;
        if (j == holder) {
          arm = c + " & { unlock(d) . " + idle_name(mask) + "() }";
        } else {
          unsigned rest = mask & ~(1u << (j - 1));
          arm = c + " & { try_lock(u) . " + c + " + block(()) . " + locked_name(holder, mask) +
                "(), bye(u2) . " + locked_name(holder, rest) + "() }";
        }
        rows.push_back(c + " & l" + tj + "(u0) . " + arm);
      }
      def_order.push_back(locked_name(holder, mask));
      def_bodies.push_back("exists& { " + joinv(rows, ", ") + " }");
    }
  }

  std::ostringstream out;
  out << "# mutex, " << spec.threads << " thread(s)\n";
  for (int i = 0; i < spec.threads; ++i) {
    std::string body = "m[t" + std::to_string(i + 1) + "][sm] + l" + std::to_string(i + 1) +
                       "(()) . m[t" + std::to_string(i + 1) + "][sm] + bye(()) . 0";
    for (auto it = spec.scripts[i].rbegin(); it != spec.scripts[i].rend(); ++it)
      body = mutex_op(i + 1, *it, body);
    out << "process T" << (i + 1) << " = " << body << "\n";
  }
  std::vector<std::string> parts{idle_name(full) + "()"};
  for (int i = 1; i <= spec.threads; ++i) parts.push_back("T" + std::to_string(i));
  std::string wired = "(" + joinv(parts, " | ") + ")";
  for (size_t i = def_order.size(); i-- > 0;)
    wired = "def " + def_order[i] + "() = " + def_bodies[i] + " in " + wired;
  out << "process Main = new m . " << wired << "\n";
  return {out.str(), "Main", std::nullopt};
}

namespace {

std::string rw_op(int thread, RwVerb v, const std::string& rest) {
  std::string t = std::to_string(thread);
  std::string c = "m[t" + t + "][sm]";
  std::string connect = c + " + l" + t + "(()) . ";
  switch (v) {
    case RwVerb::Read:
      return connect + c + " + read(()) . " + c + " & { ok(g) . " + rest + " }";
    case RwVerb::DropRead:
      return connect + c + " + readEnd(()) . " + rest;
    case RwVerb::Write:
      return connect + c + " + write(()) . " + c + " & { ok(g) . " + rest + " }";
    case RwVerb::DropWrite:
      return connect + c + " + writeEnd(()) . " + rest;
  }
  return rest;
}

} // namespace

Encoding encode_rwlock(const RwLockSpec& spec) {
  if (spec.threads < 1) throw EncodingError("rwlock needs at least one thread");
  if (static_cast<int>(spec.scripts.size()) != spec.threads)
    throw EncodingError("rwlock needs one script per thread");
  for (int i = 0; i < spec.threads; ++i) {
    int readers = 0, writers = 0;
    for (RwVerb v : spec.scripts[i]) {
      if (v == RwVerb::Read) readers++;
      if (v == RwVerb::DropRead) {
        if (readers <= 0)
          throw EncodingError("thread " + std::to_string(i + 1) +
                              " drops a read guard it does not hold");
        readers--;
      }
      if (v == RwVerb::Write) writers++;
      if (v == RwVerb::DropWrite) {
        if (writers <= 0)
          throw EncodingError("thread " + std::to_string(i + 1) +
                              " drops a write guard it does not hold");
        writers--;
      }
    }
  }
  const unsigned full = (1u << spec.threads) - 1;
  std::vector<std::string> def_order;
  std::vector<std::string> def_bodies;
  auto idle_name = [](unsigned mask) { return "RwIdle_s" + subset_tag(mask); };
  auto rd_name = [](unsigned readers, unsigned mask) {
    return "Rd_g" + subset_tag(readers) + "_s" + subset_tag(mask);
  };
  auto wr_name = [](int holder, unsigned mask) {
    return "Wr" + std::to_string(holder) + "_s" + subset_tag(mask);
  };

  for (unsigned mask = 1; mask <= full; ++mask) {
    std::vector<std::string> rows;
    for (int i : members(mask)) {
      std::string ti = std::to_string(i);
      std::string c = "m[sm][t" + ti + "]";
      unsigned rest = mask & ~(1u << (i - 1));
      std::string on_bye = rest ? idle_name(rest) + "()" : "0";
      rows.push_back(c + " & l" + ti + "(u) . " + c + " & { read(u2) . " + c + " + ok(()) . " +
                     rd_name(1u << (i - 1), mask) + "(), write(u3) . " + c + " + ok(()) . " +
                     wr_name(i, mask) + "(), bye(u4) . " + on_bye + " }");
    }
    def_order.push_back(idle_name(mask));
    def_bodies.push_back("exists& { " + joinv(rows, ", ") + " }");
  }
  for (unsigned mask = 1; mask <= full; ++mask) {
    for (unsigned readers = 1; readers <= full; ++readers) {
      if ((readers & mask) != readers) continue; // readers hold the guard, so active
      std::vector<std::string> rows;
      for (int i : members(mask)) {
        std::string ti = std::to_string(i);
        std::string c = "m[sm][t" + ti + "]";
        unsigned bit = 1u << (i - 1);
        std::string arm;
        if (readers & bit) {
          unsigned left = readers & ~bit;
          std::string next = left ? rd_name(left, mask) + "()" : idle_name(mask) + "()";
          arm = c + " & { readEnd(u) . " + next + " }";
        } else {
          std::string on_read = rd_name(readers | bit, mask) + "()";
          unsigned rest = mask & ~bit;
          // A departing thread never holds a guard here, so rest covers it.
          std::string on_bye = rd_name(readers, rest) + "()";
          arm = c + " & { read(u) . " + c + " + ok(()) . " + on_read + ", bye(u2) . " + on_bye +
                " }";
        }
        rows.push_back(c + " & l" + ti + "(u0) . " + arm);
      }
      def_order.push_back(rd_name(readers, mask));
      def_bodies.push_back("exists& { " + joinv(rows, ", ") + " }");
    }
  }
  for (unsigned mask = 1; mask <= full; ++mask) {
    for (int holder : members(mask)) {
      std::string th = std::to_string(holder);
      std::string c = "m[sm][t" + th + "]";
      def_order.push_back(wr_name(holder, mask));
      def_bodies.push_back(c + " & { l" + th + "(u) . " + c + " & { writeEnd(u2) . " +
                           idle_name(mask) + "() } }");
    }
  }

  std::ostringstream out;
  out << "# rwlock, " << spec.threads << " thread(s)\n";
  for (int i = 0; i < spec.threads; ++i) {
    std::string body = "m[t" + std::to_string(i + 1) + "][sm] + l" + std::to_string(i + 1) +
                       "(()) . m[t" + std::to_string(i + 1) + "][sm] + bye(()) . 0";
    for (auto it = spec.scripts[i].rbegin(); it != spec.scripts[i].rend(); ++it)
      body = rw_op(i + 1, *it, body);
    out << "process T" << (i + 1) << " = " << body << "\n";
  }
  std::vector<std::string> parts{idle_name(full) + "()"};
  for (int i = 1; i <= spec.threads; ++i) parts.push_back("T" + std::to_string(i));
  std::string wired = "(" + joinv(parts, " | ") + ")";
  for (size_t i = def_order.size(); i-- > 0;)
    wired = "def " + def_order[i] + "() = " + def_bodies[i] + " in " + wired;
  out << "process Main = new m . " << wired << "\n";
  return {out.str(), "Main", std::nullopt};
}

namespace {

std::vector<std::vector<std::string>> split_script(const std::string& text) {
  std::vector<std::vector<std::string>> sections;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "thread") {
      sections.emplace_back();
      continue;
    }
    if (sections.empty()) sections.emplace_back();
    sections.back().push_back(word);
  }
  return sections;
}

} // namespace

MutexSpec parse_mutex_script(const std::string& text, int threads) {
  auto sections = split_script(text);
  if (static_cast<int>(sections.size()) != threads)
    throw EncodingError("script has " + std::to_string(sections.size()) + " thread sections, " +
                        std::to_string(threads) + " expected");
  MutexSpec spec;
  spec.threads = threads;
  for (const auto& sec : sections) {
    std::vector<MutexVerb> verbs;
    for (const auto& w : sec) {
      if (w == "lock")
        verbs.push_back(MutexVerb::Lock);
      else if (w == "try_lock")
        verbs.push_back(MutexVerb::TryLock);
      else if (w == "unlock")
        verbs.push_back(MutexVerb::Unlock);
      else
        throw EncodingError("unknown mutex verb " + w);
    }
    spec.scripts.push_back(std::move(verbs));
  }
  return spec;
}

RwLockSpec parse_rwlock_script(const std::string& text, int threads) {
  auto sections = split_script(text);
  if (static_cast<int>(sections.size()) != threads)
    throw EncodingError("script has " + std::to_string(sections.size()) + " thread sections, " +
                        std::to_string(threads) + " expected");
  RwLockSpec spec;
  spec.threads = threads;
  for (const auto& sec : sections) {
    std::vector<RwVerb> verbs;
    for (const auto& w : sec) {
      if (w == "read")
        verbs.push_back(RwVerb::Read);
      else if (w == "drop_read")
        verbs.push_back(RwVerb::DropRead);
      else if (w == "write")
        verbs.push_back(RwVerb::Write);
      else if (w == "drop_write")
        verbs.push_back(RwVerb::DropWrite);
      else if (w == "try_read" || w == "try_write")
        throw EncodingError("verb " + w + " is not modelled");
      else
        throw EncodingError("unknown rwlock verb " + w);
    }
    spec.scripts.push_back(std::move(verbs));
  }
  return spec;
}

} // namespace mssr
