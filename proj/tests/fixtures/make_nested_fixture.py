#!/usr/bin/env python3
# Copyright 2026 The Riderscope Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds nested.zip with the stock zipfile module (deflate members included)
so the archive reader is tested against an archive it did not write itself.

Layout:
  classes.dex            the minimal.dex fixture, mtime 2014-01-20 10:00
  assets/inner.apk       a zip holding another classes.dex (depth-1 dex)
  res/icon.png           PNG magic -> OTHER
  scripts/run.sh         shebang -> TEXT_EXEC
  noshebang.sh           .sh + printable -> TEXT_EXEC by path heuristic
  lib/arm/libfix.so      ELF fixture -> ELF_EXEC
  data.bin               zero bytes -> OTHER
"""

import io
import zipfile
from pathlib import Path

HERE = Path(__file__).parent


def main() -> None:
    dex = (HERE / "minimal.dex").read_bytes()
    elf = (HERE / "elf" / "libfix-arm32le.so").read_bytes()

    def deflated(name, date_time):
        info = zipfile.ZipInfo(name, date_time)
        info.compress_type = zipfile.ZIP_DEFLATED
        return info

    inner = io.BytesIO()
    with zipfile.ZipFile(inner, "w") as z:
        z.writestr(deflated("classes.dex", (2013, 6, 1, 0, 0, 0)), dex)

    out = HERE / "nested.zip"
    with zipfile.ZipFile(out, "w") as z:
        z.writestr(deflated("classes.dex", (2014, 1, 20, 10, 0, 0)), dex)
        z.writestr(
            zipfile.ZipInfo("assets/inner.apk", (2014, 1, 20, 10, 0, 0)),
            inner.getvalue(),
        )
        z.writestr(
            zipfile.ZipInfo("res/icon.png", (2014, 1, 20, 10, 0, 0)),
            b"\x89PNG\r\n\x1a\n" + b"\x00" * 24,
        )
        z.writestr(
            zipfile.ZipInfo("scripts/run.sh", (2014, 1, 20, 10, 0, 0)),
            b"#!/system/bin/sh\nmkdir /data/data/x\n",
        )
        z.writestr(
            zipfile.ZipInfo("noshebang.sh", (2014, 1, 20, 10, 0, 0)),
            b"mount -o remount,rw /system\n",
        )
        z.writestr(deflated("lib/arm/libfix.so", (2014, 1, 20, 10, 0, 0)), elf)
        z.writestr(zipfile.ZipInfo("data.bin", (2014, 1, 20, 10, 0, 0)), b"\x00" * 16)
    print(f"wrote {out} ({out.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
