#!/usr/bin/env python3

import sys
import shutil
import subprocess
from pathlib import Path

APP_NAME = "Vlasol"


def build_project():
    # Пути
    src_dir = Path("src")
    dist_dir = Path("dist")
    build_dir = Path("build")

    main_script = src_dir / "main.py"
    if not main_script.exists():
        print("❌ Ошибка: main.py не найден в папке src")
        return False

    print("🔨 Сборка решателя...")
    print(f"   Главный скрипт: {main_script}")

    for old in (dist_dir, build_dir):
        if old.exists():
            shutil.rmtree(old)
    dist_dir.mkdir(exist_ok=True)

    cmd = [
        'pyinstaller',
        '--onefile',
        '--clean',
        '--distpath', str(dist_dir),
        '--workpath', str(build_dir),
        '--name', APP_NAME,
        '--paths', str(src_dir),
        str(main_script)
    ]

    # Модули решателя как скрытые импорты; тесты и оракул в сборку не входят
    for py_file in sorted(src_dir.glob("*.py")):
        if py_file != main_script and not py_file.stem.startswith("test_"):
            cmd.extend(['--hidden-import', py_file.stem])

    # numpy/scipy подтягивают fft и signal лениво
    for module in ['scipy.fft', 'scipy.signal', 'jinja2']:
        cmd.extend(['--hidden-import', module])

    print("   Команда сборки:")
    print("   " + " ".join(cmd))

    try:
        print("   🚀 Запуск PyInstaller...")
        subprocess.run(cmd, check=True, capture_output=True, text=True)
        print("   ✅ Сборка завершена успешно!")

        for candidate in (dist_dir / f"{APP_NAME}.exe", dist_dir / APP_NAME):
            if candidate.exists():
                size_mb = candidate.stat().st_size / (1024 * 1024)
                print(f"   📦 Создан: {candidate.name} ({size_mb:.1f} MB)")
                return True
        print("   ❌ Исполняемый файл не создан")
        return False

    except subprocess.CalledProcessError as e:
        print(f"   ❌ Ошибка сборки: {e}")
        if e.stderr:
            print(f"   Подробности: {e.stderr}")
        return False
    except FileNotFoundError:
        print("   ❌ PyInstaller не установлен")
        print("   Установите: pip install pyinstaller")
        return False


if __name__ == "__main__":
    success = build_project()

    if success:
        print("\n🎉 Решатель успешно собран!")
        print(f"📁 Файл: dist/{APP_NAME}")
    else:
        print("\n💥 Сборка не удалась")
        sys.exit(1)
