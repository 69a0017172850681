import csv
import json
import logging
import math
from pathlib import Path

from django.core.serializers.json import DjangoJSONEncoder
from lxml import etree
from reportlab.graphics import renderSVG
from reportlab.graphics.charts.legends import Legend
from reportlab.graphics.charts.lineplots import LinePlot
from reportlab.graphics.shapes import Drawing, String
from reportlab.lib import colors

logger = logging.getLogger(__name__)

FORMATS = ('csv', 'json', 'svg')


def format_value(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return '' if math.isnan(value) else '%.12g' % value
    return str(value)


class ResultEncoder(DjangoJSONEncoder):
    """JSON for sidecars: numpy scalars and arrays become plain numbers and lists."""

    def default(self, o):
        if hasattr(o, 'tolist'):
            return o.tolist()
        if isinstance(o, Path):
            return str(o)
        return super().default(o)


class ResultEmitter:
    """Writes an experiment result as CSV, a JSON sidecar and an SVG plot derived from the CSV."""

    def __init__(self, result, out_dir):
        self.result = result
        self.out_dir = Path(out_dir)
        self.stem = result.config.name
        self._setup_styles()

    def _setup_styles(self):
        self.series_colors = [
            colors.HexColor('#1f77b4'), colors.HexColor('#d62728'), colors.HexColor('#2ca02c'),
            colors.HexColor('#9467bd'), colors.HexColor('#ff7f0e'), colors.HexColor('#8c564b'),
            colors.HexColor('#e377c2'), colors.HexColor('#7f7f7f'),
        ]
        self.width, self.height = 640, 420

    def path(self, fmt):
        return self.out_dir / f'{self.stem}.{fmt}'

    def write_csv(self):
        path = self.path('csv')
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(self.result.columns)
            for row in self.result.rows:
                writer.writerow([format_value(row.get(column)) for column in self.result.columns])
        return path

    def write_sidecar(self):
        path = self.path('json')
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.result.sidecar(), f, cls=ResultEncoder, indent=2, sort_keys=True)
        return path

    def _read_series(self, csv_path):
        plot = self.result.plot
        series = {}
        with open(csv_path, encoding='utf-8', newline='') as f:
            for row in csv.DictReader(f):
                label = ' '.join(f'{key}={row[key]}' for key in plot.get('group', []))
                for column in plot['y']:
                    x, y = row.get(plot['x'], ''), row.get(column, '')
                    if x == '' or y == '':
                        continue
                    x, y = float(x), float(y)
                    if plot.get('log'):
                        if x <= 0 or y <= 0:
                            continue
                        x, y = math.log10(x), math.log10(y)
                    series.setdefault(f'{label} {column}'.strip(), []).append((x, y))
        return {label: sorted(points) for label, points in series.items() if points}

    def write_svg(self, csv_path=None):
        """Line plot of the CSV columns named in ``result.plot``; None when nothing is plottable."""
        if not self.result.plot:
            logger.warning('No plot defined for %s; skipping SVG', self.stem)
            return None
        csv_path = csv_path or self.path('csv')
        series = self._read_series(csv_path)
        if not series:
            logger.warning('Nothing to plot for %s', self.stem)
            return None

        drawing = Drawing(self.width, self.height)
        chart = LinePlot()
        chart.x, chart.y = 60, 60
        chart.width, chart.height = self.width - 260, self.height - 110
        chart.data = list(series.values())
        for i, _ in enumerate(chart.data):
            chart.lines[i].strokeColor = self.series_colors[i % len(self.series_colors)]
            chart.lines[i].strokeWidth = 1.2
        drawing.add(chart)

        legend = Legend()
        legend.x, legend.y = self.width - 190, self.height - 50
        legend.fontSize = 7
        legend.alignment = 'right'
        legend.colorNamePairs = [
            (self.series_colors[i % len(self.series_colors)], label) for i, label in enumerate(series)
        ]
        drawing.add(legend)

        prefix = 'log10 ' if self.result.plot.get('log') else ''
        drawing.add(String(self.width / 2 - 100, self.height - 25, f'{self.stem}: {prefix}{", ".join(self.result.plot["y"])}',
                           fontSize=11, fontName='Helvetica-Bold'))
        drawing.add(String(chart.x + chart.width / 2, 25, f'{prefix}{self.result.plot["x"]}', fontSize=9))

        path = self.path('svg')
        renderSVG.drawToFile(drawing, str(path))
        validate_svg(path)
        return path

    def emit(self, formats=FORMATS):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        csv_path = self.write_csv()
        if 'csv' in formats:
            written.append(csv_path)
        if 'json' in formats:
            written.append(self.write_sidecar())
        if 'svg' in formats:
            svg_path = self.write_svg(csv_path)
            if svg_path:
                written.append(svg_path)
        if 'csv' not in formats:
            csv_path.unlink()
        return written


def validate_svg(path):
    """Parse the SVG file and check its root element; raises ValueError if malformed."""
    try:
        root = etree.parse(str(path)).getroot()
    except etree.XMLSyntaxError as e:
        raise ValueError(f'{path} is not well-formed XML: {e}') from e
    if etree.QName(root).localname != 'svg':
        raise ValueError(f'{path} does not have an <svg> root element')
    return root


def emit(result, formats=FORMATS, out_dir=None):
    return ResultEmitter(result, out_dir or result.config.output_dir).emit(formats)
