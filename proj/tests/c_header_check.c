// Copyright 2026 The hbpe Authors
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

/* The public header must compile as plain C. */

#include <stdio.h>
#include <string.h>

#include "hbpe/hbpe.h"

int main(void) {
  hbpe_dataset* ds = NULL;
  if (hbpe_dataset_generate(NULL, 0, &ds) != HBPE_ERR_USAGE) return 1;
  if (strlen(hbpe_last_error()) == 0) return 1;
  printf("hbpe %s\n", hbpe_version());
  return 0;
}
