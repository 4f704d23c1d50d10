# Generated by Django 4.2.26 on 2026-10-18 10:12

from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='EvalReport',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=128)),
                ('mode', models.CharField(max_length=32)),
                ('sequence', models.CharField(blank=True, max_length=128, null=True)),
                ('noise_sigma', models.FloatField(blank=True, null=True)),
                ('psnr', models.FloatField(blank=True, null=True)),
                ('ssim', models.FloatField(blank=True, null=True)),
                ('pearson_r', models.FloatField(blank=True, null=True)),
                ('mean_iterations', models.FloatField(blank=True, null=True)),
                ('savings', models.FloatField(blank=True, null=True)),
                ('report_path', models.CharField(blank=True, max_length=512, null=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
        ),
        migrations.CreateModel(
            name='PatchRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('frame', models.IntegerField()),
                ('origin_x', models.IntegerField()),
                ('origin_y', models.IntegerField()),
                ('exit_iteration', models.IntegerField()),
                ('mean_abs_error', models.FloatField(blank=True, null=True)),
                ('mean_uncertainty', models.FloatField()),
                ('report', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='patches', to='evaluation.evalreport')),
            ],
        ),
    ]
