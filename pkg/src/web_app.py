"""
Веб-интерфейс algcon
Запуск: streamlit run src/web_app.py
"""
import streamlit as st
import pandas as pd

from constraint import (
    build_matrix,
    constraint_from_dict,
    constraint_from_json,
    is_degenerate,
    normal_form,
    render_text,
)
from errors import AlgconError
from graph import parse_graph
from main import graph_summary
from report_generator import ReportGenerator
from study import census
from transform import find_transformations, simplify

EXAMPLE_GRAPH = """nodes a b c d
dir a b
dir b d
bi a c
bi a d
bi b c
"""


def main():
    """Основная функция веб-приложения"""
    st.set_page_config(
        page_title="algcon",
        page_icon="🧩",
        layout="wide"
    )

    st.title("🧩 algcon")
    st.markdown("Графические ограничения линейных моделей структурных уравнений")

    # Боковая панель с режимами
    st.sidebar.header("⚙️ Настройки")
    mode = st.sidebar.radio(
        "Выберите режим:",
        ["🕸️ Граф", "🧩 Ограничение", "📊 Перепись"]
    )
    seed = st.sidebar.number_input("Seed", min_value=0, value=0, step=1)

    if mode == "🕸️ Граф":
        mode_graph(int(seed))
    elif mode == "🧩 Ограничение":
        mode_constraint()
    else:
        mode_census(int(seed))


def matrix_frame(gc) -> pd.DataFrame:
    """Матрица-шаблон ограничения в виде таблицы"""
    matrix = build_matrix(gc)
    return pd.DataFrame(
        matrix.to_lists(),
        index=[f"{node}:{v}" for node, v in matrix.rows],
        columns=[f"{node}:{v}" for node, v in matrix.cols],
    )


def mode_graph(seed: int):
    """Режим анализа графа"""
    st.header("🕸️ Смешанный граф")

    text = st.text_area("Файл графа:", value=EXAMPLE_GRAPH, height=200)
    trials = st.slider("Размер батареи проверок", min_value=0, max_value=50, value=10)

    if st.button("🔍 Анализировать", type="primary"):
        try:
            with st.spinner("Вывод ограничений..."):
                summary = graph_summary(parse_graph(text), seed=seed, trials=trials)
        except AlgconError as e:
            st.error(f"❌ {e}")
            return
        display_graph(summary)


def display_graph(summary):
    """Отображение сводки по графу"""
    st.markdown("---")
    col1, col2, col3, col4 = st.columns(4)
    col1.metric("Узлов", len(summary['nodes']))
    col2.metric("Рёбер", len(summary['directed']) + len(summary['bidirected']))
    col3.metric("HTC", "да" if summary['htc'] else "нет")
    col4.metric("Ограничений", summary['constraint_count'])

    st.write(f"Ацикличный: {summary['acyclic']}, без луков: {summary['bow_free']}, "
             f"предковый: {summary['ancestral']}")
    st.code(summary['canonical'])

    with st.expander("🔍 Half-trek достижимость"):
        st.dataframe(pd.DataFrame(
            [{'node': v, 'htr': ", ".join(ws)} for v, ws in summary['htr'].items()]
        ), use_container_width=True)

    if summary['family'] is None:
        st.warning("⚠️ Граф не HTC-идентифицируем")
        return

    st.markdown("### 📚 Семейство Y")
    st.dataframe(pd.DataFrame(
        [{'node': v, 'Y': ", ".join(ys)} for v, ys in summary['family']['sets'].items()]
    ), use_container_width=True)

    for item in summary['constraints']:
        st.markdown(f"### 🧩 Пара {item['pair'][0]}, {item['pair'][1]}")
        st.code(item['drawing'])
        gc = constraint_from_dict(item["constraint"])
        st.dataframe(matrix_frame(gc), use_container_width=True)
        if item['polynomial']:
            st.code(item['polynomial'])
        battery = item.get('battery')
        if battery:
            if battery['model_failures']:
                st.error(f"Модельные выборки: {battery['model_pass']}/{battery['trials']}")
            else:
                st.success(f"Модельные выборки: {battery['model_pass']}/{battery['trials']}")
            st.info(f"Отвергнуто вне модели: {battery['offmodel_reject']}/{battery['trials']}")


def mode_constraint():
    """Режим работы с одним ограничением"""
    st.header("🧩 Графическое ограничение")

    text = st.text_area("JSON ограничения:", height=200,
                        placeholder='{"partA": [...], "partB": [...], "edges": [...]}')

    if st.button("🔍 Анализировать", type="primary"):
        if not text.strip():
            st.warning("⚠️ Пожалуйста, вставьте ограничение")
            return
        try:
            gc = constraint_from_json(text)
            st.code(render_text(gc))
            st.dataframe(matrix_frame(gc), use_container_width=True)

            st.markdown("### 📐 Нормальная форма")
            st.code(render_text(normal_form(gc)))
            if is_degenerate(gc):
                st.warning("⚠️ Определитель тождественно равен нулю")
                return

            if gc.is_tree():
                st.markdown("### 🔄 Преобразования")
                triples = find_transformations(gc)
                if triples:
                    st.dataframe(pd.DataFrame(triples, columns=['central', 'left', 'right']),
                                 use_container_width=True)
                else:
                    st.info("Применимых преобразований нет")

                core, factors = simplify(gc)
                st.markdown("### ✂️ Ядро")
                st.code(render_text(core))
                for factor in factors:
                    st.markdown("Множитель:")
                    st.code(render_text(factor))
        except AlgconError as e:
            st.error(f"❌ {e}")


def mode_census(seed: int):
    """Режим переписи классов эквивалентности"""
    st.header("📊 Перепись классов")

    col1, col2 = st.columns(2)
    with col1:
        n = st.number_input("Узлов", min_value=2, max_value=4, value=3)
        m = st.number_input("Рёбер (минимум)", min_value=0, max_value=12, value=2)
    with col2:
        bows = st.checkbox("Разрешить луки")
        cycles = st.checkbox("Разрешить циклы")
        one = st.checkbox("Только классы с одним ограничением")

    if st.button("🔍 Запустить", type="primary"):
        with st.spinner("Перепись..."):
            report = census(int(n), int(m), edges_mode='at-least', allow_bows=bows, allow_cycles=cycles,
                            one_constraint=one, seed=seed, cross_samples=3)
        display_census(report)


def display_census(report):
    """Отображение отчёта переписи"""
    summary = report['summary']
    st.markdown("---")
    col1, col2, col3 = st.columns(3)
    col1.metric("Классов", summary['class_count'])
    col2.metric("Без HTC", summary['non_htc_classes'])
    col3.metric("Нарушений", len(report['invariant_violations']))

    st.markdown("### 📈 Таблица")
    st.dataframe(ReportGenerator.table_frame(report), use_container_width=True)

    with st.expander("🧩 Классы"):
        st.dataframe(ReportGenerator.classes_frame(report), use_container_width=True)

    for v in report['invariant_violations']:
        st.error(v)

    # Кнопки экспорта
    st.markdown("---")
    st.markdown("### 💾 Экспорт отчёта")

    params = report['parameters']
    base_name = f"census_n{params['nodes']}_m{params['edges']}"
    col1, col2, col3 = st.columns(3)

    with col1:
        st.download_button(
            "📄 Скачать TXT",
            ReportGenerator.generate_text_report(report),
            file_name=f"{base_name}.txt",
            mime="text/plain"
        )

    with col2:
        st.download_button(
            "📊 Скачать JSON",
            ReportGenerator.generate_json_report(report),
            file_name=f"{base_name}.json",
            mime="application/json"
        )

    with col3:
        st.download_button(
            "📝 Скачать MD",
            ReportGenerator.generate_markdown_report(report),
            file_name=f"{base_name}.md",
            mime="text/markdown"
        )


if __name__ == "__main__":
    main()
