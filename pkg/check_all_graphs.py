import json
import os
import subprocess
import sys

graphs_dir = "graphs"
reports_dir = "reports"


def run(args):
    return subprocess.run(
        [sys.executable, "src/main.py"] + args,
        capture_output=True,
        text=True,
        encoding='utf-8'
    )


print("=" * 80)
print("📚 ПРОВЕРКА ВСЕХ ГРАФОВ")
print("=" * 80)
print()

# Проверяем наличие папки
if not os.path.exists(graphs_dir):
    print(f"❌ Папка '{graphs_dir}' не найдена!")
    print()
    print("Создайте папку и добавьте туда файлы графов:")
    print(f"  mkdir {graphs_dir}")
    sys.exit(1)

graph_files = sorted(f for f in os.listdir(graphs_dir) if f.endswith('.txt'))

if not graph_files:
    print(f"❌ В папке '{graphs_dir}' нет файлов графов (*.txt)!")
    sys.exit(1)

os.makedirs(reports_dir, exist_ok=True)
print(f"📂 Найдено файлов: {len(graph_files)}")
print()

failed = 0
for i, filename in enumerate(graph_files, 1):
    filepath = os.path.join(graphs_dir, filename)
    stem = os.path.splitext(filename)[0]

    print(f"{'=' * 80}")
    print(f"📝 [{i}/{len(graph_files)}] Проверяю: {filename}")
    print(f"{'=' * 80}")

    try:
        result = run(["--format", "text", "graph", "--graph", filepath])
        print(result.stdout)

        derived = run(["--format", "json", "derive", "--graph", filepath])
        if derived.returncode != 0:
            print(f"⚠️  {filename} - ошибка при выводе ограничений")
            print("Ошибка:", derived.stdout, derived.stderr)
            failed += 1
            continue

        constraints = [line for line in derived.stdout.splitlines() if line.startswith('{')]
        ok = True
        for k, line in enumerate(constraints, 1):
            constraint_path = os.path.join(reports_dir, f"{stem}_constraint_{k}.json")
            with open(constraint_path, 'w', encoding='utf-8') as f:
                f.write(line)

            verified = run(["verify", "--graph", filepath, "--constraint", constraint_path])
            battery = json.loads(verified.stdout) if verified.returncode == 0 else None
            if battery is None:
                ok = False
                print(f"  ❌ constraint {k}: fails on model samples")
            else:
                print(f"  ✅ constraint {k}: {battery['model_pass']}/{battery['trials']} model samples, "
                      f"{battery['offmodel_reject']}/{battery['trials']} off-model rejected")

        if ok:
            print(f"✅ {filename} - проверен успешно ({len(constraints)} ограничений)")
        else:
            failed += 1
    except Exception as e:
        print(f"❌ {filename} - критическая ошибка: {e}")
        failed += 1

    print()

print("=" * 80)
print("✅ ВСЕ ГРАФЫ ПРОВЕРЕНЫ!" if not failed else f"⚠️  С ОШИБКАМИ: {failed}")
print("=" * 80)
print()
print(f"📊 Проверено файлов: {len(graph_files)}")
print(f"📁 Ограничения находятся в папке: {reports_dir}/")
sys.exit(1 if failed else 0)
