// Copyright 2026 The DRASIC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRASIC_RUNTIME_H_
#define DRASIC_RUNTIME_H_

namespace drasic {

// Keeps large activation buffers in the heap between training steps instead
// of returning them to the kernel, which otherwise dominates step time
// through page faults. No-op outside glibc.
void TuneAllocator();

}  // namespace drasic

#endif  // DRASIC_RUNTIME_H_
