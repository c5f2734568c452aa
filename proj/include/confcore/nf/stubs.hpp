#pragma once

#include <set>

#include "confcore/nf/base.hpp"

namespace confcore::nf {

/// Contract-complete session stub: hands out session ids and echoes QoS.
class Smf : public NfBase {
 public:
  Smf(CoreEnv env, std::string instance_id, std::string address,
      std::shared_ptr<tee::Svm> svm = nullptr);
  bool has_session(const std::string& session_id) const;

 private:
  std::set<std::string> sessions_;
  std::uint64_t next_session_ = 1;
  mutable std::mutex smf_mu_;
};

/// Slice selection stub: assigns the default slice when none is requested.
class Nssf : public NfBase {
 public:
  Nssf(CoreEnv env, std::string instance_id, std::string address,
       std::shared_ptr<tee::Svm> svm = nullptr);
};

/// User-plane pass-through: forwards payload bytes unmodified, counts them.
class Upf : public NfBase {
 public:
  Upf(CoreEnv env, std::string instance_id, std::string address,
      std::shared_ptr<tee::Svm> svm = nullptr);
  std::uint64_t bytes_forwarded() const;

 private:
  std::uint64_t bytes_forwarded_ = 0;
  mutable std::mutex upf_mu_;
};

}  // namespace confcore::nf
