#include <exception>

#include "archgraph/transform.hpp"

namespace archgraph {

std::vector<RecordQuads> transform_records_parallel(const std::vector<RecordInput>& inputs,
                                                    const TransformEnv& env) {
  const long n = static_cast<long>(inputs.size());
  std::vector<RecordQuads> out(inputs.size());
  std::vector<std::exception_ptr> errors(inputs.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    try {
      const auto& in = inputs[static_cast<size_t>(i)];
      out[static_cast<size_t>(i)] = transform_record(in.record, in.version, *in.tmpl, *in.mapping, env);
    } catch (...) {
      errors[static_cast<size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace archgraph
